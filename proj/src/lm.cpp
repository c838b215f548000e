#include "edu/lm.hpp"

#include "binary_io.hpp"
#include "edu/net.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace edu {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::table: return "table";
    case ModelKind::ngram: return "ngram";
    case ModelKind::remote: return "remote";
  }
  return "unknown";
}

LogitVector next_logits(const LanguageModel& model, TokenSpan prompt, TokenSpan prefix) {
  const auto& vocab = model.vocabulary();
  for (TokenId t : prompt)
    if (!vocab.contains(t)) throw Error(Errc::unknown_token, "prompt id " + std::to_string(t));
  for (TokenId t : prefix)
    if (!vocab.contains(t)) throw Error(Errc::unknown_token, "prefix id " + std::to_string(t));
  LogitVector out = model.logits(prompt, prefix);
  if (std::size_t(out.size()) != vocab.size())
    throw Error(Errc::bad_format, "logit vector length differs from vocabulary size");
  if (!out.allFinite()) throw Error(Errc::bad_format, "non-finite logits from " + model.identity());
  return out;
}

// ---------------------------------------------------------------------------
// TableModel

TableModel::TableModel(Vocabulary vocab, LogitVector fallback, std::string name)
    : vocab_(std::move(vocab)), fallback_(std::move(fallback)), name_(std::move(name)) {
  if (std::size_t(fallback_.size()) != vocab_.size())
    throw Error(Errc::invalid_argument, "fallback logits length differs from vocabulary size");
}

std::shared_ptr<TableModel> TableModel::always(Vocabulary vocab, TokenId token) {
  if (!vocab.contains(token)) throw Error(Errc::unknown_token, std::to_string(token));
  LogitVector logits = LogitVector::Zero(Eigen::Index(vocab.size()));
  logits[token] = 10.0;
  return std::make_shared<TableModel>(std::move(vocab), std::move(logits),
                                      "table:always-" + std::to_string(token));
}

void TableModel::add_rule(Rule rule) {
  if (std::size_t(rule.logits.size()) != vocab_.size())
    throw Error(Errc::invalid_argument, "rule logits length differs from vocabulary size");
  rules_.push_back(std::move(rule));
}

LogitVector TableModel::logits(TokenSpan prompt, TokenSpan prefix) const {
  const Rule* best = nullptr;
  auto rank = [](const Rule& r) {
    return std::tuple(r.prompt.has_value(), r.position.has_value(), r.suffix.size());
  };
  for (const auto& rule : rules_) {
    if (rule.prompt && !std::equal(rule.prompt->begin(), rule.prompt->end(), prompt.begin(),
                                   prompt.end()))
      continue;
    if (rule.position && *rule.position != prefix.size()) continue;
    if (rule.suffix.size() > prefix.size()) continue;
    if (!std::equal(rule.suffix.begin(), rule.suffix.end(), prefix.end() - rule.suffix.size()))
      continue;
    if (!best || rank(rule) > rank(*best)) best = &rule;
  }
  return best ? best->logits : fallback_;
}

// ---------------------------------------------------------------------------
// NgramModel

NgramModel::NgramModel(Vocabulary vocab, std::size_t order, double smoothing)
    : vocab_(std::move(vocab)), order_(order), smoothing_(smoothing) {
  if (order_ < 1) throw Error(Errc::invalid_argument, "ngram order must be >= 1");
  if (!(smoothing_ >= 0.0) || !std::isfinite(smoothing_))
    throw Error(Errc::invalid_argument, "smoothing must be finite and >= 0");
}

void NgramModel::observe(TokenSpan sequence) {
  TokenSeq padded(order_ - 1, kBegin);
  padded.insert(padded.end(), sequence.begin(), sequence.end());
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    TokenId next = padded[i];
    if (!vocab_.contains(next)) throw Error(Errc::unknown_token, std::to_string(next));
    TokenSeq hist(padded.begin() + std::ptrdiff_t(i - (order_ - 1)), padded.begin() + std::ptrdiff_t(i));
    Row& row = full_[hist];
    ++row.next[next];
    ++row.total;
  }
}

void NgramModel::finalize() {
  backoff_.assign(order_, Table{});
  for (const auto& [hist, row] : full_) {
    for (std::size_t len = 0; len < order_; ++len) {
      TokenSeq suffix(hist.end() - std::ptrdiff_t(len), hist.end());
      Row& dst = backoff_[len][suffix];
      for (auto [tok, c] : row.next) dst.next[tok] += c;
      dst.total += row.total;
    }
  }
}

TokenSeq NgramModel::history(TokenSpan prompt, TokenSpan prefix) const {
  const std::size_t need = order_ - 1;
  TokenSeq hist(need, kBegin);
  std::size_t filled = 0;
  for (auto it = prefix.rbegin(); it != prefix.rend() && filled < need; ++it)
    hist[need - 1 - filled++] = *it;
  for (auto it = prompt.rbegin(); it != prompt.rend() && filled < need; ++it)
    hist[need - 1 - filled++] = *it;
  return hist;
}

Eigen::VectorXd NgramModel::probabilities(TokenSpan prompt, TokenSpan prefix) const {
  const auto V = Eigen::Index(vocab_.size());
  if (backoff_.empty()) throw Error(Errc::invalid_argument, "ngram model used before finalize()");
  TokenSeq hist = history(prompt, prefix);
  const Row* row = nullptr;
  for (std::size_t len = hist.size() + 1; len-- > 0;) {
    auto it = backoff_[len].find(TokenSeq(hist.end() - std::ptrdiff_t(len), hist.end()));
    if (it != backoff_[len].end() && it->second.total > 0) {
      row = &it->second;
      break;
    }
  }
  Eigen::VectorXd probs(V);
  if (!row) {
    probs.setConstant(1.0 / double(V));
    return probs;
  }
  const double denom = double(row->total) + smoothing_ * double(V);
  probs.setConstant(smoothing_ / denom);
  for (auto [tok, c] : row->next) probs[tok] = (double(c) + smoothing_) / denom;
  return probs;
}

LogitVector NgramModel::logits(TokenSpan prompt, TokenSpan prefix) const {
  Eigen::VectorXd p = probabilities(prompt, prefix);
  return p.unaryExpr([](double v) { return v > 0.0 ? std::log(v) : kZeroLogit; });
}

std::uint64_t NgramModel::count(TokenSpan history, TokenId next) const {
  auto it = full_.find(TokenSeq(history.begin(), history.end()));
  if (it == full_.end()) return 0;
  auto jt = it->second.next.find(next);
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::string NgramModel::identity() const {
  std::ostringstream os;
  os << "ngram:order=" << order_ << ":k=" << smoothing_ << ":histories=" << full_.size();
  return os.str();
}

namespace {
constexpr char kNgramMagic[] = "EDUNGRAM1";

}  // namespace

using io::get;
using io::get_string;
using io::put;
using io::put_string;

void NgramModel::save(std::ostream& out) const {
  out.write(kNgramMagic, sizeof kNgramMagic - 1);
  put<std::uint32_t>(out, std::uint32_t(order_));
  put<double>(out, smoothing_);
  put<std::uint32_t>(out, std::uint32_t(vocab_.size()));
  for (const auto& s : vocab_.tokens()) put_string(out, s);
  put<std::int32_t>(out, vocab_.eos());
  put<std::uint64_t>(out, full_.size());
  for (const auto& [hist, row] : full_) {
    for (TokenId t : hist) put<std::int32_t>(out, t);
    put<std::uint32_t>(out, std::uint32_t(row.next.size()));
    for (auto [tok, c] : row.next) {
      put<std::int32_t>(out, tok);
      put<std::uint64_t>(out, c);
    }
  }
  if (!out) throw Error(Errc::sink_write_failure, "writing ngram model");
}

std::shared_ptr<NgramModel> NgramModel::load(std::istream& in) {
  char magic[sizeof kNgramMagic - 1];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kNgramMagic, sizeof magic) != 0)
    throw Error(Errc::bad_format, "not an EDUNGRAM1 file");
  auto order = get<std::uint32_t>(in);
  auto smoothing = get<double>(in);
  auto vsize = get<std::uint32_t>(in);
  std::vector<std::string> tokens;
  tokens.reserve(vsize);
  for (std::uint32_t i = 0; i < vsize; ++i) tokens.push_back(get_string(in));
  auto eos = get<std::int32_t>(in);
  auto model = std::make_shared<NgramModel>(Vocabulary(std::move(tokens), eos), order, smoothing);
  auto n_hist = get<std::uint64_t>(in);
  for (std::uint64_t h = 0; h < n_hist; ++h) {
    TokenSeq hist(order - 1);
    for (auto& t : hist) t = get<std::int32_t>(in);
    Row row;
    auto n_next = get<std::uint32_t>(in);
    for (std::uint32_t j = 0; j < n_next; ++j) {
      auto tok = get<std::int32_t>(in);
      auto c = get<std::uint64_t>(in);
      if (!model->vocab_.contains(tok)) throw Error(Errc::bad_format, "count for unknown token");
      row.next[tok] = c;
      row.total += c;
    }
    model->full_.emplace(std::move(hist), std::move(row));
  }
  model->finalize();
  return model;
}

std::shared_ptr<NgramModel> train_ngram(const Vocabulary& vocab, const std::vector<TokenSeq>& corpus,
                                        std::size_t order, double smoothing) {
  if (corpus.empty()) throw Error(Errc::empty_corpus, "no training sequences");
  auto model = std::make_shared<NgramModel>(vocab, order, smoothing);
  for (const auto& seq : corpus) model->observe(seq);
  model->finalize();
  return model;
}

// ---------------------------------------------------------------------------
// Remote protocol

std::string format_logits_response(const LogitVector& logits) {
  std::string out = "OK ";
  char buf[32];
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (i) out += ',';
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, logits[i]);
    out.append(buf, ptr);
  }
  return out;
}

LogitVector parse_logits_response(std::string_view line, std::size_t expected_size) {
  if (line.starts_with("ERR")) {
    std::string code(line.size() > 4 ? line.substr(4) : std::string_view("unspecified"));
    if (code == to_string(Errc::unknown_token)) throw Error(Errc::unknown_token, "remote rejected ids");
    throw Error(Errc::remote_unreachable, "remote error " + code);
  }
  if (!line.starts_with("OK ")) throw Error(Errc::bad_format, "malformed response");
  std::string_view body = line.substr(3);
  LogitVector out(static_cast<Eigen::Index>(expected_size));
  std::size_t i = 0, pos = 0;
  while (pos <= body.size()) {
    std::size_t end = body.find(',', pos);
    if (end == std::string_view::npos) end = body.size();
    if (i >= expected_size) throw Error(Errc::bad_format, "too many logits in response");
    double v = 0;
    auto [ptr, ec] = std::from_chars(body.data() + pos, body.data() + end, v);
    if (ec != std::errc() || ptr != body.data() + end) throw Error(Errc::bad_format, "bad logit");
    out[Eigen::Index(i++)] = v;
    pos = end + 1;
  }
  if (i != expected_size) throw Error(Errc::bad_format, "logit count mismatch");
  return out;
}

std::string handle_logits_request(const LanguageModel& model, std::string_view line) {
  try {
    if (!line.starts_with("LOGITS ")) return "ERR bad-request";
    std::string_view rest = line.substr(7);
    auto space = rest.find(' ');
    std::string_view a = rest.substr(0, space);
    std::string_view b = space == std::string_view::npos ? std::string_view{} : rest.substr(space + 1);
    TokenSeq prompt = split_ids(base64_decode(a));
    TokenSeq prefix = split_ids(base64_decode(b));
    return format_logits_response(next_logits(model, prompt, prefix));
  } catch (const Error& e) {
    return std::string("ERR ") + to_string(e.code());
  } catch (const std::exception&) {
    return "ERR internal";
  }
}

RemoteModel::RemoteModel(Vocabulary vocab, std::string host, int port)
    : vocab_(std::move(vocab)), host_(std::move(host)), port_(port) {}

RemoteModel::~RemoteModel() { net::close_fd(fd_); }

std::string RemoteModel::identity() const {
  return "remote:" + host_ + ":" + std::to_string(port_);
}

LogitVector RemoteModel::logits(TokenSpan prompt, TokenSpan prefix) const {
  std::lock_guard lock(mutex_);
  if (fd_ < 0) fd_ = net::connect_tcp(host_, port_);
  std::string request =
      "LOGITS " + base64_encode(join_ids(prompt)) + " " + base64_encode(join_ids(prefix));
  std::string line;
  try {
    net::write_line(fd_, request);
    if (!net::read_line(fd_, buffer_, line)) throw Error(Errc::remote_unreachable, "connection closed");
  } catch (const Error&) {
    net::close_fd(fd_);
    fd_ = -1;
    buffer_.clear();
    throw;
  }
  return parse_logits_response(line, vocab_.size());
}

}  // namespace edu
