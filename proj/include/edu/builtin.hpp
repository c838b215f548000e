#pragma once
// Reference n-gram models trained on the noisy teacher corpus of a family.
#include "edu/lm.hpp"
#include "edu/task.hpp"

#include <string>

namespace edu {

struct BuiltinModelSpec {
  std::size_t corpus_size = 100000;
  std::size_t order = 5;
  double smoothing = 1e-3;
  std::uint64_t corpus_seed = 7;
  TeacherConfig teacher;
};

/// Trains (once per process and spec) the reference model of a family.
std::shared_ptr<const NgramModel> builtin_model(TaskFamily family, const BuiltinModelSpec& spec = {});

/// Resolves `builtin:<family>` or a path to a saved EDUNGRAM1 file.
ModelHandle load_model(const std::string& spec);

}  // namespace edu
