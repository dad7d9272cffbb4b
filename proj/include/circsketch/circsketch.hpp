#pragma once

#include "circsketch/circular_sketch.hpp"
#include "circsketch/errors.hpp"
#include "circsketch/field.hpp"
#include "circsketch/hamming_sketch.hpp"
#include "circsketch/randomness.hpp"
#include "circsketch/scheme.hpp"
#include "circsketch/selection.hpp"
#include "circsketch/serialize.hpp"
#include "circsketch/shift_decoder.hpp"
#include "circsketch/strings.hpp"
