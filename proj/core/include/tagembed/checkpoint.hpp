#pragma once
// Binary checkpoint container: JSON header (configs, vocab, counters)
// followed by named tensors as raw little-endian doubles. Raw bytes make
// the save/load round trip bit-exact.

#include <string>

#include "tagembed/trainer.hpp"

namespace tagembed {

void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

}  // namespace tagembed
