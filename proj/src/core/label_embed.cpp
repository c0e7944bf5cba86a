#include "pnn/core/label_embed.hpp"

#include <stdexcept>
#include <string>

#include "pnn/core/error.hpp"

namespace pnn {

int LabelEmbedSpec::output_dim(int input_dim) const {
  return mode == EmbedMode::Append ? input_dim + n_classes : input_dim;
}

void LabelEmbedSpec::validate(int input_dim) const {
  if (n_classes < 1) throw InvalidSpec("label embedding needs n_classes >= 1");
  if (mode == EmbedMode::Overwrite &&
      (slot_offset < 0 || slot_offset + n_classes > input_dim)) {
    throw InvalidSpec("label slots [" + std::to_string(slot_offset) + "," +
                      std::to_string(slot_offset + n_classes) + ") do not fit in dimension " +
                      std::to_string(input_dim));
  }
}

namespace {

void check_label(int label, const LabelEmbedSpec& spec) {
  if (label < 0 || label >= spec.n_classes) {
    throw std::out_of_range("label " + std::to_string(label) + " outside [0," +
                            std::to_string(spec.n_classes) + ")");
  }
}

template <typename Row>
void write_slots(Row&& row, int offset, int label, const LabelEmbedSpec& spec) {
  row.segment(offset, spec.n_classes).setZero();
  row[offset + label] = spec.slot_value;
}

}  // namespace

Vector embed_label(const Eigen::Ref<const Vector>& x, int label, const LabelEmbedSpec& spec) {
  const int dim = static_cast<int>(x.size());
  spec.validate(dim);
  check_label(label, spec);
  Vector out(spec.output_dim(dim));
  out.head(dim) = x;
  const int offset = spec.mode == EmbedMode::Append ? dim : spec.slot_offset;
  write_slots(out, offset, label, spec);
  return out;
}

Matrix embed_labels(const Matrix& x, std::span<const int> labels, const LabelEmbedSpec& spec) {
  const int dim = static_cast<int>(x.cols());
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw ConsistencyError("embed_labels: " + std::to_string(x.rows()) + " rows but " +
                           std::to_string(labels.size()) + " labels");
  }
  spec.validate(dim);
  Matrix out(x.rows(), spec.output_dim(dim));
  out.leftCols(dim) = x;
  const int offset = spec.mode == EmbedMode::Append ? dim : spec.slot_offset;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    check_label(labels[static_cast<std::size_t>(i)], spec);
    write_slots(out.row(i), offset, labels[static_cast<std::size_t>(i)], spec);
  }
  return out;
}

Matrix embed_labels(const Matrix& x, int label, const LabelEmbedSpec& spec) {
  std::vector<int> labels(static_cast<std::size_t>(x.rows()), label);
  return embed_labels(x, labels, spec);
}

int draw_negative_label(int label, int n_classes, Rng& rng) {
  if (n_classes < 2) throw InvalidSpec("negative labels need at least 2 classes");
  std::uniform_int_distribution<int> pick(0, n_classes - 2);
  const int r = pick(rng);
  return r < label ? r : r + 1;
}

PosNegBatch make_pos_neg_batch(std::span<const Sample> batch, const LabelEmbedSpec& spec, Rng& rng) {
  if (batch.empty()) throw InvalidSpec("make_pos_neg_batch: empty batch");
  if (spec.n_classes < 2) throw InvalidSpec("make_pos_neg_batch: a single class has no negatives");
  const auto dim = batch.front().features.size();
  Matrix x(static_cast<Eigen::Index>(batch.size()), dim);
  PosNegBatch out;
  out.labels.reserve(batch.size());
  out.neg_labels.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = batch[i].features.transpose();
    out.labels.push_back(batch[i].label);
    out.neg_labels.push_back(draw_negative_label(batch[i].label, spec.n_classes, rng));
  }
  out.x_pos = embed_labels(x, out.labels, spec);
  out.x_neg = embed_labels(x, out.neg_labels, spec);
  return out;
}

}  // namespace pnn
