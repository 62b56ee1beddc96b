#include "gfte/vocab.hpp"

#include <set>

#include <json.hpp>

#include "gfte/error.hpp"
#include "gfte/rng.hpp"
#include "gfte/table.hpp"

namespace gfte {

std::vector<char32_t> utf8_decode(const std::string& s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
    }
    if (len > 1) {
      if (i + len <= s.size()) {
        char32_t acc = b0 & (0x7F >> len);
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
          const unsigned char bk = static_cast<unsigned char>(s[i + k]);
          if ((bk & 0xC0) != 0x80) {
            ok = false;
            break;
          }
          acc = (acc << 6) | (bk & 0x3F);
        }
        if (ok) cp = acc;
      } else {
        len = 1;
      }
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  for (char32_t cp : cps) out += utf8_encode(cp);
  return out;
}

Vocabulary::Vocabulary(std::vector<char32_t> sorted_codepoints, int max_len) : max_len_(max_len) {
  if (max_len < 1) throw UsageError("Vocabulary: max_len must be positive");
  int next = 2;
  for (char32_t cp : sorted_codepoints) {
    if (!ids_.count(cp)) ids_[cp] = next++;
  }
}

int Vocabulary::id_of(char32_t cp) const {
  auto it = ids_.find(cp);
  return it == ids_.end() ? kUnk : it->second;
}

std::string Vocabulary::fingerprint() const { return to_hex(fnv1a64(to_json())); }

std::string Vocabulary::to_json() const {
  nlohmann::json j;
  j["max_len"] = max_len_;
  auto& cps = j["codepoints"] = nlohmann::json::array();
  for (const auto& [cp, id] : ids_) {
    (void)id;  // ids are implied by sorted order
    cps.push_back(static_cast<std::uint32_t>(cp));
  }
  return j.dump();
}

Vocabulary Vocabulary::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("Vocabulary: malformed JSON: ") + e.what());
  }
  if (!j.contains("max_len") || !j.contains("codepoints"))
    throw DataError("Vocabulary: missing max_len or codepoints");
  std::vector<char32_t> cps;
  for (const auto& v : j["codepoints"]) cps.push_back(static_cast<char32_t>(v.get<std::uint32_t>()));
  return Vocabulary(std::move(cps), j["max_len"].get<int>());
}

Vocabulary build_vocab(const std::vector<TableInstance>& corpus, int max_len) {
  std::vector<const TableInstance*> view;
  view.reserve(corpus.size());
  for (const auto& t : corpus) view.push_back(&t);
  return build_vocab(view, max_len);
}

Vocabulary build_vocab(const std::vector<const TableInstance*>& corpus, int max_len) {
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");
  std::set<char32_t> seen;
  for (const TableInstance* t : corpus)
    for (const auto& c : t->cells)
      for (char32_t cp : utf8_decode(c.text)) seen.insert(cp);
  return Vocabulary(std::vector<char32_t>(seen.begin(), seen.end()), max_len);
}

std::vector<int> encode_text(const Vocabulary& v, const std::string& utf8) {
  std::vector<int> ids(static_cast<std::size_t>(v.max_len()), Vocabulary::kPad);
  const auto cps = utf8_decode(utf8);
  const std::size_t n = std::min<std::size_t>(cps.size(), static_cast<std::size_t>(v.max_len()));
  for (std::size_t i = 0; i < n; ++i) ids[i] = v.id_of(cps[i]);
  return ids;
}

}  // namespace gfte
