#include "tagembed/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace tagembed {

std::vector<std::string> split_lowercase_words(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (const char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) {
                words.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

Vocab build_vocab(const std::vector<Document>& documents, int min_frequency) {
    if (documents.empty()) throw std::invalid_argument("build_vocab: empty corpus");
    if (min_frequency < 1) throw std::invalid_argument("build_vocab: min_frequency must be >= 1");

    std::map<std::string, std::int64_t> counts;  // ordered map keeps ties lexicographic
    for (const auto& doc : documents) {
        for (auto& w : split_lowercase_words(doc.text)) counts[w] += 1;
    }

    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (const auto& [word, count] : counts) {
        if (count >= min_frequency) kept.emplace_back(word, count);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocab v;
    v.id_to_token = {"[PAD]", "[UNK]", "[CLS]"};
    for (const auto& [word, count] : kept) {
        v.token_to_id[word] = v.size();
        v.id_to_token.push_back(word);
    }
    for (std::int32_t i = 0; i < Vocab::kNumReserved; ++i) {
        v.token_to_id[v.id_to_token[static_cast<std::size_t>(i)]] = i;
    }
    return v;
}

TokenSequence tokenize(const Document& doc, const Vocab& vocab, int max_len) {
    if (max_len < 1) throw std::invalid_argument("tokenize: max_len must be >= 1");
    TokenSequence seq;
    seq.ids.push_back(Vocab::kCls);
    for (const auto& w : split_lowercase_words(doc.text)) {
        if (static_cast<int>(seq.ids.size()) >= max_len) break;
        seq.ids.push_back(vocab.lookup(w));
    }
    seq.attention_length = static_cast<int>(seq.ids.size());
    return seq;
}

void pad_batch(std::vector<TokenSequence>& batch, int fixed_length) {
    int target = fixed_length;
    if (target <= 0) {
        for (const auto& s : batch) target = std::max(target, s.attention_length);
    }
    for (auto& s : batch) {
        if (s.attention_length > target) {
            throw std::invalid_argument("pad_batch: sequence longer than target length");
        }
        s.ids.resize(static_cast<std::size_t>(target), Vocab::kPad);
    }
}

}  // namespace tagembed
