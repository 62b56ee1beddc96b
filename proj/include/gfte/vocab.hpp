#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gfte {

struct TableInstance;

// Character-level vocabulary over Unicode codepoints. PAD=0 and UNK=1 are
// reserved and never remapped; observed codepoints get dense ids from 2 up,
// ordered by codepoint so rebuilds are deterministic.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<char32_t> sorted_codepoints, int max_len = 32);

  int size() const { return static_cast<int>(ids_.size()) + 2; }
  int max_len() const { return max_len_; }
  int id_of(char32_t cp) const;

  const std::map<char32_t, int>& mapping() const { return ids_; }

  // Stable content hash; checkpoints embed it so text encodings are traceable.
  std::string fingerprint() const;

  std::string to_json() const;
  static Vocabulary from_json(const std::string& json_text);

 private:
  std::map<char32_t, int> ids_;
  int max_len_ = 32;
};

// One id per distinct character observed across all cell texts, plus PAD/UNK.
Vocabulary build_vocab(const std::vector<TableInstance>& corpus, int max_len = 32);
Vocabulary build_vocab(const std::vector<const TableInstance*>& corpus, int max_len = 32);

// First max_len characters mapped to ids, right-padded with PAD. Always
// returns exactly max_len ids.
std::vector<int> encode_text(const Vocabulary& v, const std::string& utf8);

// Decodes UTF-8 into codepoints; malformed bytes decode as U+FFFD.
std::vector<char32_t> utf8_decode(const std::string& s);

// Inverse of utf8_decode for well-formed codepoints.
std::string utf8_encode(char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);

}  // namespace gfte
