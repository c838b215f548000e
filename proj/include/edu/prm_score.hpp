#pragma once

#include "edu/common.hpp"
#include "edu/task.hpp"

#include <functional>

namespace edu {

struct PrmScore {
  double p_correct = 0.5;
};

/// Scores a (task, generated prefix) pair. Must be deterministic.
using Scorer = std::function<PrmScore(const Task&, TokenSpan prefix)>;

}  // namespace edu
