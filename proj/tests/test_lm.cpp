#include "edu/lm.hpp"
#include "edu/net.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace edu;

namespace {

Vocabulary abc() { return Vocabulary({"<eos>", "a", "b", "c"}, 0); }

}  // namespace

TEST_CASE("table model that always emits token 3 has a unique maximum at 3") {
  auto m = TableModel::always(abc(), 3);
  LogitVector l = next_logits(*m, TokenSeq{1}, TokenSeq{2, 1});
  Eigen::Index arg;
  l.maxCoeff(&arg);
  CHECK(arg == 3);
  for (Eigen::Index i = 0; i < l.size(); ++i)
    if (i != 3) CHECK(l[i] < l[3]);
}

TEST_CASE("table model prefers pinned prompt, then position, then longer suffix") {
  auto v = abc();
  TableModel m(v, LogitVector::Zero(4));
  auto at = [&](int hot) {
    LogitVector l = LogitVector::Zero(4);
    l[hot] = 1;
    return l;
  };
  m.add_rule({std::nullopt, std::nullopt, TokenSeq{1}, at(1)});
  m.add_rule({std::nullopt, std::nullopt, TokenSeq{2, 1}, at(2)});
  m.add_rule({std::nullopt, std::size_t{3}, TokenSeq{}, at(3)});
  m.add_rule({TokenSeq{3}, std::nullopt, TokenSeq{}, at(0)});
  auto top = [&](const TokenSeq& prompt, const TokenSeq& prefix) {
    Eigen::Index arg;
    m.logits(prompt, prefix).maxCoeff(&arg);
    return arg;
  };
  CHECK(top({1}, {1}) == 1);
  CHECK(top({1}, {2, 1}) == 2);
  CHECK(top({1}, {1, 2, 1}) == 3);
  CHECK(top({3}, {1, 2, 1}) == 0);
}

TEST_CASE("next_logits rejects out-of-range ids") {
  auto m = TableModel::always(abc(), 1);
  CHECK_THROWS_AS(next_logits(*m, TokenSeq{9}, {}), Error);
  try {
    next_logits(*m, {}, TokenSeq{-2});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_token);
  }
}

TEST_CASE("train_ngram single continuation and symmetry") {
  auto v = abc();
  auto m1 = train_ngram(v, {{1, 2}, {1, 2}}, 2, 0.0);
  CHECK(m1->probabilities({}, TokenSeq{1})[2] == doctest::Approx(1.0));
  auto m2 = train_ngram(v, {{1, 2}, {1, 3}}, 2, 0.0);
  auto p = m2->probabilities({}, TokenSeq{1});
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[3] == doctest::Approx(0.5));
  CHECK_THROWS_AS(train_ngram(v, {}, 2, 0.0), Error);
}

TEST_CASE("ngram probabilities match an independent count-and-normalize oracle") {
  const auto& v = testing::scripted_vocabulary();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<TokenId> tok(1, 6);
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < 1000; ++i) {
    TokenSeq s;
    const int n = 2 + int(rng() % 6);
    for (int k = 0; k < n; ++k) s.push_back(tok(rng));
    s.push_back(v.eos());
    corpus.push_back(s);
  }
  const std::size_t order = 3;
  const double k = 0.5;
  auto model = train_ngram(v, corpus, order, k);
  std::map<TokenSeq, std::map<TokenId, double>> counts;
  for (const auto& s : corpus) {
    TokenSeq padded(order - 1, -1);
    padded.insert(padded.end(), s.begin(), s.end());
    for (std::size_t i = order - 1; i < padded.size(); ++i)
      counts[TokenSeq(padded.begin() + std::ptrdiff_t(i - order + 1), padded.begin() + std::ptrdiff_t(i))]
            [padded[i]] += 1.0;
  }
  std::size_t checked = 0;
  for (const auto& s : corpus) {
    if (checked > 400) break;
    for (std::size_t cut = 0; cut < s.size(); ++cut, ++checked) {
      TokenSeq prefix(s.begin(), s.begin() + std::ptrdiff_t(cut));
      TokenSeq hist(order - 1, -1);
      hist.insert(hist.end(), prefix.begin(), prefix.end());
      hist.erase(hist.begin(), hist.end() - std::ptrdiff_t(order - 1));
      const auto& row = counts.at(hist);
      double total = 0;
      for (auto& [t, c] : row) total += c;
      auto p = model->probabilities({}, prefix);
      double sum = 0;
      for (TokenId t = 0; t < TokenId(v.size()); ++t) {
        const double c = row.count(t) ? row.at(t) : 0.0;
        const double expect = (c + k) / (total + k * double(v.size()));
        CHECK(std::abs(p[t] - expect) <= 1e-12);
        sum += p[t];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("ngram with empty prefix scores the prompt context") {
  auto v = abc();
  // prompt token 3 followed by a, twice; followed by b once
  auto m = train_ngram(v, {{3, 1}, {3, 1}, {3, 2}}, 2, 0.0);
  auto p = m->probabilities(TokenSeq{3}, {});
  CHECK(p[1] == doctest::Approx(2.0 / 3.0));
  CHECK(p[2] == doctest::Approx(1.0 / 3.0));
  LogitVector l = next_logits(*m, TokenSeq{3}, {});
  CHECK(l.allFinite());
  CHECK(l[1] == doctest::Approx(std::log(2.0 / 3.0)));
  CHECK(l[0] == NgramModel::kZeroLogit);
}

TEST_CASE("ngram backs off to the longest observed suffix") {
  auto v = abc();
  auto m = train_ngram(v, {{1, 2, 3}}, 3, 0.0);
  // history (c, b) was never seen; the suffix (b) was, followed by c
  auto p = m->probabilities({}, TokenSeq{3, 2});
  CHECK(p[3] == doctest::Approx(1.0));
}

TEST_CASE("ngram logits are deterministic and survive save and load") {
  const auto& v = testing::scripted_vocabulary();
  auto m = train_ngram(v, {{1, 2, 3, 0}, {1, 3, 2, 0}, {2, 2, 1, 0}}, 3, 0.1);
  std::stringstream buf;
  m->save(buf);
  CHECK(buf.str().rfind("EDUNGRAM1", 0) == 0);
  auto loaded = NgramModel::load(buf);
  for (const TokenSeq& prefix : {TokenSeq{}, TokenSeq{1}, TokenSeq{1, 2}, TokenSeq{4, 4}}) {
    LogitVector a = m->logits({}, prefix), b = loaded->logits({}, prefix), c = m->logits({}, prefix);
    CHECK(a == b);
    CHECK(a == c);
  }
  CHECK(loaded->vocabulary() == v);
  std::stringstream bad("EDUNGRAMX");
  CHECK_THROWS_AS(NgramModel::load(bad), Error);
}

TEST_CASE("logits protocol round trip and error codes") {
  auto m = TableModel::always(abc(), 2);
  std::string line = "LOGITS " + base64_encode(join_ids(TokenSeq{1})) + " " + base64_encode(join_ids(TokenSeq{2}));
  std::string resp = handle_logits_request(*m, line);
  CHECK(resp.rfind("OK ", 0) == 0);
  CHECK(parse_logits_response(resp, 4) == m->logits(TokenSeq{1}, TokenSeq{2}));
  CHECK(handle_logits_request(*m, "LOGITS " + base64_encode("9") + " ") == "ERR unknown-token");
  CHECK(handle_logits_request(*m, "HELLO").rfind("ERR", 0) == 0);
  CHECK_THROWS_AS(parse_logits_response("OK 1,2", 4), Error);
}

TEST_CASE("remote model matches the served model and reports unreachable servers") {
  auto served = train_ngram(abc(), {{1, 2, 3, 0}, {1, 3, 0}}, 2, 0.5);
  net::LineServer server([&](std::string_view line) { return handle_logits_request(*served, line); });
  RemoteModel remote(abc(), "127.0.0.1", server.port());
  for (const TokenSeq& prefix : {TokenSeq{}, TokenSeq{1}, TokenSeq{1, 3}}) {
    LogitVector a = next_logits(remote, TokenSeq{2}, prefix), b = served->logits(TokenSeq{2}, prefix);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(next_logits(remote, TokenSeq{7}, {}), Error);
  server.stop();
  RemoteModel dead(abc(), "127.0.0.1", 1);
  try {
    next_logits(dead, {}, {});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::remote_unreachable);
  }
}
