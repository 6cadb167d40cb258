#pragma once

#include <string>

#include "bcpo/autodiff.hpp"

namespace bcpo::nd {

// Flat named-tensor container.
//
// <stem>.bin  — all tensor payloads concatenated in manifest order, each value
//               a little-endian IEEE-754 binary64.
// <stem>.json — {"format": "bcpo-tensors-v1", "tensors": [{"name", "shape",
//               "dtype": "f64", "offset", "count"}, ...]}; offset counts
//               doubles from the start of the .bin file.
void save_checkpoint(const ParamStore& store, const std::string& stem);

// Loads values into an existing store. Every stored tensor must match a
// registered parameter by name and shape.
void load_checkpoint(ParamStore& store, const std::string& stem);

}  // namespace bcpo::nd
