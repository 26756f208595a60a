#pragma once

#include "cotrain/harness.hpp"
#include "cotrain/toyworld.hpp"

namespace cotrain {

// Default world and experiment definitions. These are the calibrated
// parameters shipped as configs/*.json; the JSON files are generated from
// here by `exp make-configs`.

WorldConfig preset_pick_place_real();
WorldConfig preset_pick_place_dc();
WorldConfig preset_pick_place_prior();
WorldConfig preset_close_door_real();

ExperimentConfig preset_experiment(Protocol protocol);

}  // namespace cotrain
