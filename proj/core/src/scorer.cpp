#include "sag/scorer.hpp"

namespace sag {

ScorerParams ScorerParams::init(std::size_t input_dim, std::size_t hidden,
                                std::size_t classes, Rng& rng) {
  ScorerParams p;
  p.encoder = EncoderParams::init(input_dim, hidden, rng);
  p.classes = classes;
  const std::size_t feature_dim = 4 * p.encoder.output_dim();
  p.dense = Tensor::zeros({feature_dim, classes}, /*requires_grad=*/true);
  const double scale = 0.08;
  for (double& v : p.dense->values) v = rng.uniform(-scale, scale);
  return p;
}

std::vector<std::pair<std::string, TensorPtr>> ScorerParams::named_params(
    const std::string& prefix) const {
  auto out = encoder.named_params(prefix + ".encoder");
  out.emplace_back(prefix + ".dense", dense);
  return out;
}

TensorPtr build_feature(Tape& tape, const TensorPtr& enc_ref,
                        const TensorPtr& enc_stu) {
  if (enc_ref->shape != enc_stu->shape) {
    throw DimensionError("build_feature: encoding dims disagree: " +
                         enc_ref->shape_str() + " vs " + enc_stu->shape_str());
  }
  return concat(tape, {enc_ref, enc_stu, mul(tape, enc_ref, enc_stu),
                       abs_diff(tape, enc_ref, enc_stu)});
}

TensorPtr build_feature_batch(Tape& tape, const TensorPtr& enc_ref,
                              const TensorPtr& enc_stu) {
  if (enc_ref->shape != enc_stu->shape) {
    throw DimensionError("build_feature_batch: encoding dims disagree");
  }
  return concat_cols(tape, {enc_ref, enc_stu, mul(tape, enc_ref, enc_stu),
                            abs_diff(tape, enc_ref, enc_stu)});
}

TensorPtr score(Tape& tape, const ScorerParams& p, const EmbeddingTable& table,
                const std::vector<int>& ref_ids,
                const std::vector<int>& stu_ids, std::size_t max_len) {
  auto enc_ref = encode(tape, p.encoder, table, ref_ids, max_len);
  auto enc_stu = encode(tape, p.encoder, table, stu_ids, max_len);
  return matmul(tape, build_feature(tape, enc_ref, enc_stu), p.dense);
}

TensorPtr score_batch(Tape& tape, const ScorerParams& p,
                      const EmbeddingTable& table,
                      const std::vector<std::vector<int>>& ref_ids,
                      const std::vector<std::vector<int>>& stu_ids,
                      std::size_t max_len) {
  auto enc_ref = encode_batch(tape, p.encoder, table, ref_ids, max_len);
  auto enc_stu = encode_batch(tape, p.encoder, table, stu_ids, max_len);
  return matmul(tape, build_feature_batch(tape, enc_ref, enc_stu), p.dense);
}

}  // namespace sag
