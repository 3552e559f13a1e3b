#pragma once

#include "bricks.hpp"
#include "certify.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "invariant_sets.hpp"
#include "map_model.hpp"
#include "random.hpp"
#include "rotation.hpp"
