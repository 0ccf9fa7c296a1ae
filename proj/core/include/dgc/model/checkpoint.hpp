#pragma once

#include <filesystem>

#include "dgc/model/optimizer.hpp"
#include "dgc/model/state.hpp"

namespace dgc::model {

struct Checkpoint {
  ModelState state;
  Adam optimizer;
  int epochs_done = 0;
};

// Text manifest (format tag, PyramidConfig and counters as key=value lines,
// then one "tensor=<name>" line per record), a "---" line, then the tensor
// records in manifest order. Parameters, batch-norm statistics and Adam
// moments are all stored, so a resumed run continues exactly.
void save_checkpoint(const std::filesystem::path& path, const ModelState& state, const Adam& opt,
                     int epochs_done);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dgc::model
