#pragma once
// Whitespace-lowercase tokenizer with a frequency cutoff. Deterministic:
// ids are assigned by (frequency desc, token asc) after the reserved slots.

#include <string>
#include <unordered_map>
#include <vector>

#include "tagembed/graph.hpp"

namespace tagembed {

struct Vocab {
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;
    static constexpr std::int32_t kCls = 2;
    static constexpr std::int32_t kNumReserved = 3;

    std::vector<std::string> id_to_token;  // includes reserved tokens
    std::unordered_map<std::string, std::int32_t> token_to_id;

    std::int32_t size() const { return static_cast<std::int32_t>(id_to_token.size()); }
    std::int32_t lookup(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? kUnk : it->second;
    }
};

struct TokenSequence {
    std::vector<std::int32_t> ids;  // ids[0] == kCls; padded with kPad
    int attention_length = 0;       // count of non-pad positions

    int padded_length() const { return static_cast<int>(ids.size()); }
};

std::vector<std::string> split_lowercase_words(const std::string& text);

// Words occurring fewer than min_frequency times map to [UNK].
Vocab build_vocab(const std::vector<Document>& documents, int min_frequency);

// [CLS]-prefixed, truncated to max_len, no padding yet.
TokenSequence tokenize(const Document& doc, const Vocab& vocab, int max_len);

// Right-pads every sequence with [PAD] to the batch maximum (or to
// fixed_length if positive).
void pad_batch(std::vector<TokenSequence>& batch, int fixed_length = 0);

}  // namespace tagembed
