#include "edu/builtin.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <tuple>

namespace edu {

std::shared_ptr<const NgramModel> builtin_model(TaskFamily family, const BuiltinModelSpec& spec) {
  static std::mutex mutex;
  static std::map<std::tuple<int, std::size_t, std::size_t, double, std::uint64_t, double, double, double>,
                  std::shared_ptr<const NgramModel>>
      cache;
  if (family == TaskFamily::scripted) throw Error(Errc::unknown_family, "scripted has no builtin model");
  const auto& t = spec.teacher;
  auto key = std::make_tuple(int(family), spec.corpus_size, spec.order, spec.smoothing, spec.corpus_seed,
                             t.easy_correct, t.hard_correct, t.hard_misconception);
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) {
    auto corpus = teacher_corpus(family, spec.corpus_size, spec.teacher, derive_seed(spec.corpus_seed, to_string(family)));
    slot = train_ngram(task_vocabulary(), corpus, spec.order, spec.smoothing);
  }
  return slot;
}

ModelHandle load_model(const std::string& spec) {
  constexpr std::string_view prefix = "builtin:";
  if (spec.starts_with(prefix)) return builtin_model(parse_family(spec.substr(prefix.size())));
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw Error(Errc::invalid_argument, "cannot open model file " + spec);
  return NgramModel::load(in);
}

}  // namespace edu
