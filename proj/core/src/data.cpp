#include "fgnmt/data.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "fgnmt/error.hpp"
#include "fgnmt/special_tokens.hpp"

namespace fgnmt {

Sentence tokenize(std::string_view line) {
  Sentence tokens;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

std::string join(const Sentence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// ---- BPE ------------------------------------------------------------------

namespace {

using Symbols = std::vector<std::string>;
using SymbolPair = std::pair<std::string, std::string>;

// Splits a word into UTF-8 code points and tags the last one with </w>.
Symbols split_word(const std::string& word) {
  Symbols symbols;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, word.size() - i);
    symbols.push_back(word.substr(i, len));
    i += len;
  }
  if (!symbols.empty()) symbols.back() += kEndOfWord;
  return symbols;
}

// Replaces every non-overlapping occurrence of `pair`, scanning left to right.
void merge_pair(Symbols& symbols, const SymbolPair& pair) {
  Symbols out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size();) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
      out.push_back(pair.first + pair.second);
      i += 2;
    } else {
      out.push_back(symbols[i]);
      ++i;
    }
  }
  symbols = std::move(out);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

BPEMerges learn_bpe(const std::vector<Sentence>& corpus, std::size_t n_merges) {
  std::map<std::string, std::size_t> word_counts;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) ++word_counts[token];
  }
  if (word_counts.empty()) throw DataError("learn_bpe: empty corpus");

  std::vector<std::pair<Symbols, std::size_t>> words;
  words.reserve(word_counts.size());
  for (const auto& [word, count] : word_counts) words.emplace_back(split_word(word), count);

  BPEMerges result;
  while (result.merges.size() < n_merges) {
    std::map<SymbolPair, std::size_t> pair_counts;
    for (const auto& [symbols, count] : words) {
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        pair_counts[{symbols[i], symbols[i + 1]}] += count;
      }
    }
    if (pair_counts.empty()) break;
    // std::map iterates pairs in lexicographic order, so strict > keeps the
    // smallest pair among equally frequent ones.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const SymbolPair chosen = best->first;
    for (auto& [symbols, count] : words) merge_pair(symbols, chosen);
    result.merges.push_back(chosen);
  }
  return result;
}

Sentence apply_bpe(const BPEMerges& merges, const Sentence& tokens) {
  std::map<SymbolPair, std::size_t> rank;
  for (std::size_t i = 0; i < merges.merges.size(); ++i) rank.emplace(merges.merges[i], i);

  Sentence out;
  for (const auto& token : tokens) {
    Symbols symbols = split_word(token);
    while (symbols.size() > 1) {
      std::size_t best_rank = std::numeric_limits<std::size_t>::max();
      const SymbolPair* best = nullptr;
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        auto it = rank.find({symbols[i], symbols[i + 1]});
        if (it != rank.end() && it->second < best_rank) {
          best_rank = it->second;
          best = &it->first;
        }
      }
      if (!best) break;
      merge_pair(symbols, *best);
    }
    auto& last = symbols.back();
    last.resize(last.size() - kEndOfWord.size());
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      out.push_back(symbols[i] + std::string(kContinuation));
    }
    out.push_back(last);
  }
  return out;
}

Sentence unbpe(const Sentence& subwords, const std::function<void(const std::string&)>& warn) {
  Sentence out;
  std::string pending;
  bool open = false;
  for (const auto& unit : subwords) {
    if (ends_with(unit, kContinuation)) {
      pending += unit.substr(0, unit.size() - kContinuation.size());
      open = true;
    } else {
      out.push_back(pending + unit);
      pending.clear();
      open = false;
    }
  }
  if (open) {
    if (warn) warn("unbpe: trailing continuation marker at end of line");
    out.push_back(pending);
  }
  return out;
}

void save_merges(const BPEMerges& merges, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(merges.size());
  for (const auto& [a, b] : merges.merges) lines.push_back(a + " " + b);
  write_lines(path, lines);
}

BPEMerges load_merges(const std::filesystem::path& path) {
  BPEMerges merges;
  for (const auto& line : read_lines(path)) {
    Sentence parts = tokenize(line);
    if (parts.empty()) continue;
    if (parts.size() != 2) throw DataError("malformed merge line: '" + line + "'");
    merges.merges.emplace_back(parts[0], parts[1]);
  }
  return merges;
}

// ---- Vocabulary -----------------------------------------------------------

namespace {

bool is_reserved(const std::string& token) {
  return token == kEosToken || token == kBosToken || token == kUnkToken;
}

}  // namespace

Vocabulary::Vocabulary() {
  tokens_ = {std::string(kEosToken), std::string(kBosToken), std::string(kUnkToken)};
}

std::size_t Vocabulary::to_id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::to_token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw VocabularyError("id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

bool Vocabulary::contains(const std::string& token) const { return ids_.count(token) > 0; }

IdSequence Vocabulary::encode(const Sentence& tokens, bool append_eos) const {
  IdSequence ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& t : tokens) ids.push_back(to_id(t));
  if (append_eos) ids.push_back(kEosId);
  return ids;
}

Sentence Vocabulary::decode(std::span<const std::size_t> ids) const {
  Sentence out;
  for (auto id : ids) {
    if (id == kEosId) break;
    if (id == kBosId) continue;
    out.push_back(to_token(id));
  }
  return out;
}

std::size_t Vocabulary::add(const std::string& token) {
  if (is_reserved(token)) throw DataError("cannot add reserved token " + token);
  if (token.empty()) throw DataError("cannot add an empty token");
  auto [it, inserted] = ids_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  write_lines(path, std::vector<std::string>(tokens_.begin() + kReservedIds, tokens_.end()));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  Vocabulary vocab;
  for (const auto& line : read_lines(path)) {
    if (vocab.contains(line)) throw DataError("duplicate vocabulary entry: " + line);
    vocab.add(line);
  }
  return vocab;
}

Vocabulary build_vocab(const std::vector<Sentence>& corpus, std::size_t cap) {
  if (cap < 4) throw ContractError("build_vocab: cap must be at least 4");
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      if (!is_reserved(token)) ++counts[token];
    }
  }
  if (counts.empty()) throw DataError("build_vocab: empty corpus");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  const std::size_t keep = std::min(ranked.size(), cap - kReservedIds);
  for (std::size_t i = 0; i < keep; ++i) vocab.add(ranked[i].first);
  return vocab;
}

// ---- corpora --------------------------------------------------------------

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FilesystemError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FilesystemError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw FilesystemError("write failed: " + path.string());
}

ParallelCorpus load_parallel(const std::filesystem::path& source,
                             const std::filesystem::path& target) {
  auto src_lines = read_lines(source);
  auto tgt_lines = read_lines(target);
  if (src_lines.size() != tgt_lines.size()) {
    throw DataError("parallel files differ in line count: " + std::to_string(src_lines.size()) +
                    " vs " + std::to_string(tgt_lines.size()));
  }
  ParallelCorpus corpus;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    Sentence s = tokenize(src_lines[i]);
    Sentence t = tokenize(tgt_lines[i]);
    if (s.empty() || t.empty()) continue;
    corpus.source.push_back(std::move(s));
    corpus.target.push_back(std::move(t));
  }
  return corpus;
}

ToyTask parse_toy_task(const std::string& name) {
  if (name == "copy") return ToyTask::copy;
  if (name == "reverse") return ToyTask::reverse;
  if (name == "polysemy") return ToyTask::polysemy;
  throw ContractError("unknown toy task '" + name + "' (expected copy, reverse or polysemy)");
}

std::string to_string(ToyTask task) {
  switch (task) {
    case ToyTask::copy: return "copy";
    case ToyTask::reverse: return "reverse";
    case ToyTask::polysemy: return "polysemy";
  }
  return "?";
}

ParallelCorpus toy_corpus(ToyTask task, std::size_t n_pairs, std::size_t vocab_size,
                          std::size_t max_len, std::uint64_t seed) {
  if (vocab_size < 4) throw ContractError("toy_corpus: vocab_size must be at least 4");
  if (max_len < 1 || max_len > 50) throw ContractError("toy_corpus: max_len must lie in [1, 50]");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length_dist(1, max_len);
  std::uniform_int_distribution<std::size_t> symbol_dist(0, vocab_size - 1);
  ParallelCorpus corpus;
  corpus.source.reserve(n_pairs);
  corpus.target.reserve(n_pairs);
  for (std::size_t n = 0; n < n_pairs; ++n) {
    const std::size_t len = length_dist(rng);
    std::vector<std::size_t> symbols(len);
    for (auto& s : symbols) s = symbol_dist(rng);
    Sentence src, tgt;
    for (auto s : symbols) src.push_back("s" + std::to_string(s));
    switch (task) {
      case ToyTask::copy:
        tgt = src;
        break;
      case ToyTask::reverse:
        tgt.assign(src.rbegin(), src.rend());
        break;
      case ToyTask::polysemy:
        for (std::size_t i = 0; i < len; ++i) {
          tgt.push_back("t" + std::to_string(symbols[i]) + (i % 2 == 0 ? "a" : "b"));
        }
        break;
    }
    corpus.source.push_back(std::move(src));
    corpus.target.push_back(std::move(tgt));
  }
  return corpus;
}

}  // namespace fgnmt
