#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fgnmt {

using Sentence = std::vector<std::string>;
using IdSequence = std::vector<std::size_t>;

/// Whitespace tokenization; runs of spaces/tabs collapse.
Sentence tokenize(std::string_view line);
std::string join(const Sentence& tokens);

// ---- byte pair encoding ----------------------------------------------------

inline constexpr std::string_view kEndOfWord = "</w>";
inline constexpr std::string_view kContinuation = "@@";

/// Ordered merge list. Symbols carry "</w>" when they end a word.
struct BPEMerges {
  std::vector<std::pair<std::string, std::string>> merges;

  std::size_t size() const { return merges.size(); }
};

/// Learns up to n_merges merges by repeatedly joining the most frequent
/// adjacent symbol pair inside words; ties go to the lexicographically
/// smallest pair. Throws DataError on an empty corpus.
BPEMerges learn_bpe(const std::vector<Sentence>& corpus, std::size_t n_merges);

/// Segments every token; all units of a word except the last get "@@".
Sentence apply_bpe(const BPEMerges& merges, const Sentence& tokens);

/// Joins "@@"-marked units with their successor. A dangling marker at the end
/// is stripped and reported through `warn` when given.
Sentence unbpe(const Sentence& subwords,
               const std::function<void(const std::string&)>& warn = nullptr);

// Merges file: one merge per line, two space-separated symbols.
void save_merges(const BPEMerges& merges, const std::filesystem::path& path);
BPEMerges load_merges(const std::filesystem::path& path);

// ---- vocabulary -----------------------------------------------------------

/// Token/id maps with ids 0, 1, 2 reserved for <eos>, <bos>, <unk>.
class Vocabulary {
 public:
  Vocabulary();

  std::size_t size() const { return tokens_.size(); }
  std::size_t to_id(const std::string& token) const;  // unknown -> unk id
  const std::string& to_token(std::size_t id) const;
  bool contains(const std::string& token) const;

  IdSequence encode(const Sentence& tokens, bool append_eos) const;
  // Stops at the first <eos>; skips <bos>.
  Sentence decode(std::span<const std::size_t> ids) const;

  // Adds a regular token; returns its id. Reserved spellings are rejected.
  std::size_t add(const std::string& token);

  // One token per line; line i holds id i + 3.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Keeps the cap − 3 most frequent tokens (ties lexicographic).
Vocabulary build_vocab(const std::vector<Sentence>& corpus, std::size_t cap);

// ---- corpora --------------------------------------------------------------

struct ParallelCorpus {
  std::vector<Sentence> source;
  std::vector<Sentence> target;

  std::size_t size() const { return source.size(); }
};

/// Reads aligned one-sentence-per-line files. Pairs with an empty side are
/// dropped; differing line counts are a DataError.
ParallelCorpus load_parallel(const std::filesystem::path& source,
                             const std::filesystem::path& target);
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

enum class ToyTask { copy, reverse, polysemy };
ToyTask parse_toy_task(const std::string& name);
std::string to_string(ToyTask task);

/// Synthetic pairs over symbols s0 .. s{vocab_size-1} with lengths uniform in
/// [1, max_len]. copy: target = source. reverse: reversed source. polysemy:
/// the symbol sK at 0-based position i becomes tKa for even i, tKb for odd i.
ParallelCorpus toy_corpus(ToyTask task, std::size_t n_pairs, std::size_t vocab_size,
                          std::size_t max_len, std::uint64_t seed);

}  // namespace fgnmt
