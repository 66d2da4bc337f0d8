// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "aeroop/training.hpp"

namespace aeroop {

/// AOC1 container, little-endian:
///   "AOC1", u32 version = 1,
///   u64 length + JSON text (model/train config, grid, normalizer, seeds,
///   loss history),
///   u64 count + parameter blocks,
///   u64 count + optimizer moment blocks named "m:<param>" and "v:<param>",
///   u64 Adam step, u64 epoch.
/// A block is u32 name length, name, u8 dtype (0 real64, 1 complex128),
/// u32 rank, rank x u64 extents, then f64 payload (complex as re, im pairs).
std::vector<unsigned char> encode_checkpoint(const TrainingState& state);
TrainingState decode_checkpoint(const std::vector<unsigned char>& bytes);
void save_checkpoint(const TrainingState& state, const std::string& path);
TrainingState load_checkpoint(const std::string& path);

}  // namespace aeroop
