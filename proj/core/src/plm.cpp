#include "tagembed/plm.hpp"

#include <limits>
#include <stdexcept>

namespace tagembed {

namespace {
constexpr double kInitStd = 0.02;

std::string lname(int layer, const char* tensor) {
    return "plm.l" + std::to_string(layer) + "." + tensor;
}

ad::Mat normal_init(Eigen::Index rows, Eigen::Index cols, double std, rng::Engine& eng) {
    ad::Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std * rng::normal(eng);
    }
    return m;
}
}  // namespace

void PlmConfig::validate() const {
    if (vocab_size < 1) throw std::invalid_argument("plm: vocab_size must be positive");
    if (hidden_dim < 1 || num_layers < 1 || num_heads < 1 || max_sequence_length < 1) {
        throw std::invalid_argument("plm: all size parameters must be positive");
    }
    if (hidden_dim % num_heads != 0) {
        throw std::invalid_argument("plm: hidden_dim must be divisible by num_heads");
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw std::invalid_argument("plm: dropout_rate must be in [0, 1)");
    }
}

ad::Mat DropoutState::mask(Eigen::Index rows, Eigen::Index cols) const {
    ad::Mat m(rows, cols);
    const double keep = 1.0 - rate;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = rng::uniform01(*eng) < keep ? 1.0 / keep : 0.0;
        }
    }
    return m;
}

ParamStore init_plm_params(const PlmConfig& config, std::uint64_t seed) {
    config.validate();
    auto eng = rng::make(seed);
    const int d = config.hidden_dim;
    const int ff = config.ffn_dim();

    ParamStore store;
    store.add("plm.tok_emb", normal_init(config.vocab_size, d, kInitStd, eng));
    store.add("plm.pos_emb", normal_init(config.max_sequence_length, d, kInitStd, eng));
    for (int l = 0; l < config.num_layers; ++l) {
        store.add(lname(l, "wq"), normal_init(d, d, kInitStd, eng));
        store.add(lname(l, "bq"), ad::Mat::Zero(1, d));
        store.add(lname(l, "wk"), normal_init(d, d, kInitStd, eng));
        store.add(lname(l, "bk"), ad::Mat::Zero(1, d));
        store.add(lname(l, "wv"), normal_init(d, d, kInitStd, eng));
        store.add(lname(l, "bv"), ad::Mat::Zero(1, d));
        store.add(lname(l, "wo"), normal_init(d, d, kInitStd, eng));
        store.add(lname(l, "bo"), ad::Mat::Zero(1, d));
        store.add(lname(l, "ln1_g"), ad::Mat::Ones(1, d));
        store.add(lname(l, "ln1_b"), ad::Mat::Zero(1, d));
        store.add(lname(l, "w1"), normal_init(d, ff, kInitStd, eng));
        store.add(lname(l, "b1"), ad::Mat::Zero(1, ff));
        store.add(lname(l, "w2"), normal_init(ff, d, kInitStd, eng));
        store.add(lname(l, "b2"), ad::Mat::Zero(1, d));
        store.add(lname(l, "ln2_g"), ad::Mat::Ones(1, d));
        store.add(lname(l, "ln2_b"), ad::Mat::Zero(1, d));
    }
    return store;
}

ad::Var plm_encode(ad::Tape& tape, const BoundParams& params, const PlmConfig& config,
                   const std::vector<TokenSequence>& batch, const DropoutState& dropout) {
    if (batch.empty()) throw std::invalid_argument("plm_encode: empty batch");
    const int padded = batch.front().padded_length();
    for (const auto& seq : batch) {
        if (seq.padded_length() != padded) {
            throw std::invalid_argument("plm_encode: batch sequences must share a padded length");
        }
        if (seq.padded_length() > config.max_sequence_length) {
            throw std::invalid_argument("plm_encode: sequence longer than max_sequence_length");
        }
        if (seq.ids.empty() || seq.ids[0] != Vocab::kCls) {
            throw std::invalid_argument("plm_encode: sequences must start with [CLS]");
        }
    }

    const int d = config.hidden_dim;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(config.head_dim()));
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(batch.size());

    // All sequences stacked into one (n * padded) x d matrix; attention runs
    // per row block, everything else is shared large matmuls.
    std::vector<int> tok_idx, pos_idx;
    tok_idx.reserve(static_cast<std::size_t>(n * padded));
    pos_idx.reserve(static_cast<std::size_t>(n * padded));
    std::vector<std::shared_ptr<const ad::Mat>> masks;
    masks.reserve(batch.size());
    for (const auto& seq : batch) {
        tok_idx.insert(tok_idx.end(), seq.ids.begin(), seq.ids.end());
        for (int p = 0; p < padded; ++p) pos_idx.push_back(p);
        auto mask = std::make_shared<ad::Mat>(ad::Mat::Zero(padded, padded));
        for (int j = seq.attention_length; j < padded; ++j) {
            mask->col(j).setConstant(neg_inf);
        }
        masks.push_back(std::move(mask));
    }

    ad::Var x = tape.add(tape.gather_rows(params.var("plm.tok_emb"), tok_idx),
                         tape.gather_rows(params.var("plm.pos_emb"), pos_idx));
    if (dropout.active()) x = tape.hadamard_const(x, dropout.mask(n * padded, d));

    for (int l = 0; l < config.num_layers; ++l) {
        ad::Var q = tape.add_rowvec(tape.matmul(x, params.var(lname(l, "wq"))),
                                    params.var(lname(l, "bq")));
        ad::Var k = tape.add_rowvec(tape.matmul(x, params.var(lname(l, "wk"))),
                                    params.var(lname(l, "bk")));
        ad::Var v = tape.add_rowvec(tape.matmul(x, params.var(lname(l, "wv"))),
                                    params.var(lname(l, "bv")));
        std::vector<ad::Var> att_blocks;
        att_blocks.reserve(batch.size());
        for (int b = 0; b < n; ++b) {
            ad::Var qb = tape.rows(q, b * padded, padded);
            ad::Var kb = tape.rows(k, b * padded, padded);
            ad::Var vb = tape.rows(v, b * padded, padded);
            att_blocks.push_back(tape.multihead_attention(
                qb, kb, vb, config.num_heads, att_scale, masks[static_cast<std::size_t>(b)]));
        }
        ad::Var att = tape.add_rowvec(tape.matmul(tape.concat_rows(att_blocks),
                                                  params.var(lname(l, "wo"))),
                                      params.var(lname(l, "bo")));
        if (dropout.active()) att = tape.hadamard_const(att, dropout.mask(n * padded, d));
        x = tape.layernorm(tape.add(x, att), params.var(lname(l, "ln1_g")),
                           params.var(lname(l, "ln1_b")));

        ad::Var inner = tape.gelu(tape.add_rowvec(tape.matmul(x, params.var(lname(l, "w1"))),
                                                  params.var(lname(l, "b1"))));
        ad::Var ffn = tape.add_rowvec(tape.matmul(inner, params.var(lname(l, "w2"))),
                                      params.var(lname(l, "b2")));
        if (dropout.active()) ffn = tape.hadamard_const(ffn, dropout.mask(n * padded, d));
        x = tape.layernorm(tape.add(x, ffn), params.var(lname(l, "ln2_g")),
                           params.var(lname(l, "ln2_b")));
    }

    std::vector<int> cls_idx(batch.size());
    for (int b = 0; b < n; ++b) cls_idx[static_cast<std::size_t>(b)] = b * padded;
    return tape.gather_rows(x, cls_idx);
}

ad::Mat plm_encode_values(const ParamStore& params, const PlmConfig& config,
                          const std::vector<TokenSequence>& batch) {
    ad::Tape tape;
    BoundParams bound(tape, params, /*trainable=*/false);
    return tape.value(plm_encode(tape, bound, config, batch));
}

}  // namespace tagembed
