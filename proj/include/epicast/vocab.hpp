#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "epicast/targets.hpp"

namespace epicast {

/// Word-level vocabulary with reserved control tokens. Id layout:
///   0 <pad>, 1 <unk>, 2 <bos>, 3 <time-series-special-token>,
///   4.. corpus words (frequency-sorted, ties lexicographic),
///   last five ids = class tokens in ordinal order.
class Vocab {
  public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBos = 2;
    static constexpr int kSeries = 3;

    Vocab() = default;

    explicit Vocab(std::vector<std::string> id_to_token) : id_to_token_(std::move(id_to_token)) {
        for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
            if (!token_to_id_.emplace(id_to_token_[i], static_cast<int>(i)).second)
                fail(Errc::InvalidValue, "duplicate vocab token " + id_to_token_[i]);
        }
        if (static_cast<int>(id_to_token_.size()) < 4 + kNumClasses)
            fail(Errc::InvalidValue, "vocab too small for reserved tokens");
    }

    int size() const { return static_cast<int>(id_to_token_.size()); }

    const std::vector<std::string>& tokens() const { return id_to_token_; }

    int id(const std::string& token) const {
        const auto it = token_to_id_.find(token);
        return it == token_to_id_.end() ? kUnk : it->second;
    }

    const std::string& token(int id) const {
        if (id < 0 || id >= size()) fail(Errc::IdOutOfRange, "token id " + std::to_string(id));
        return id_to_token_[static_cast<std::size_t>(id)];
    }

    /// Ids of the five class tokens, index k = ordinal k+1. Always the last
    /// five ids of the vocabulary.
    std::array<int, kNumClasses> class_ids() const {
        std::array<int, kNumClasses> ids{};
        for (int k = 0; k < kNumClasses; ++k) ids[static_cast<std::size_t>(k)] = size() - kNumClasses + k;
        return ids;
    }

    int class_id(int ordinal) const { return size() - kNumClasses + (ordinal - 1); }

  private:
    std::vector<std::string> id_to_token_;
    std::map<std::string, int> token_to_id_;
};

namespace detail {

/// The multi-word control tokens that must match as whole units.
inline const std::vector<std::string>& whole_unit_tokens() {
    static const std::vector<std::string> units = [] {
        std::vector<std::string> u{kTimeSeriesToken};
        for (int k = 1; k <= kNumClasses; ++k) u.push_back(class_token(k));
        return u;
    }();
    return units;
}

inline bool is_strip_char(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == '(' ||
           c == ')' || c == '"' || c == '\'';
}

inline void append_words(const std::string& segment, std::vector<std::string>& out) {
    std::size_t i = 0;
    while (i < segment.size()) {
        while (i < segment.size() && std::isspace(static_cast<unsigned char>(segment[i]))) ++i;
        std::size_t j = i;
        while (j < segment.size() && !std::isspace(static_cast<unsigned char>(segment[j]))) ++j;
        if (j > i) {
            std::size_t a = i, b = j;
            while (a < b && is_strip_char(segment[a])) ++a;
            while (b > a && is_strip_char(segment[b - 1])) --b;
            if (b > a) out.push_back(segment.substr(a, b - a));
        }
        i = j;
    }
}

/// Splits text into plain words and whole-unit control tokens (in order).
inline std::vector<std::string> segment_text(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t best = std::string::npos;
        const std::string* best_tok = nullptr;
        for (const auto& unit : whole_unit_tokens()) {
            const std::size_t at = text.find(unit, pos);
            if (at < best) {
                best = at;
                best_tok = &unit;
            }
        }
        if (best_tok == nullptr) {
            append_words(text.substr(pos), out);
            break;
        }
        append_words(text.substr(pos, best - pos), out);
        out.push_back(*best_tok);
        pos = best + best_tok->size();
    }
    return out;
}

} // namespace detail

/// Frequency-sorted word vocabulary over the corpus plus reserved tokens.
/// Deterministic: ties in frequency are broken lexicographically.
inline Vocab build_vocab(const std::vector<std::string>& corpus) {
    if (corpus.empty()) fail(Errc::EmptyCorpus, "build_vocab on empty corpus");
    std::map<std::string, long> freq;
    bool any = false;
    for (const auto& text : corpus) {
        for (const auto& piece : detail::segment_text(text)) {
            const auto& units = detail::whole_unit_tokens();
            if (std::find(units.begin(), units.end(), piece) != units.end()) continue;
            ++freq[piece];
            any = true;
        }
    }
    if (!any) fail(Errc::EmptyCorpus, "corpus contains no word tokens");

    std::vector<std::pair<std::string, long>> words(freq.begin(), freq.end());
    std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::string> id_to_token = {"<pad>", "<unk>", "<bos>", kTimeSeriesToken};
    for (const auto& [word, n] : words) id_to_token.push_back(word);
    for (int k = 1; k <= kNumClasses; ++k) id_to_token.push_back(class_token(k));
    return Vocab(std::move(id_to_token));
}

/// Deterministic id sequence with <bos> prepended; unknown words map to <unk>.
inline std::vector<int> tokenize(const std::string& text, const Vocab& vocab) {
    std::vector<int> ids = {Vocab::kBos};
    for (const auto& piece : detail::segment_text(text)) ids.push_back(vocab.id(piece));
    return ids;
}

} // namespace epicast
