#pragma once

#include <string>

#include "fedreg/model.hpp"

namespace fedreg {

// Binary little-endian checkpoint:
//   magic "FRSM", u32 version (=1),
//   u32 n_blocks, d_model, n_heads, d_ff, vocab_size, input_dim,
//   u32 n_taps followed by n_taps u32 tap positions,
//   u64 scalar count, then the canonical flat parameter vector as f64.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace fedreg
