#pragma once

#include <span>
#include <vector>

#include "pnn/core/dataset.hpp"
#include "pnn/core/types.hpp"

namespace pnn {

enum class EmbedMode { Overwrite, Append };

// Where and how a class label is written into an input vector. Overwrite
// replaces the C slots starting at slot_offset; Append adds C new slots.
struct LabelEmbedSpec {
  int n_classes = 0;
  int slot_offset = 0;
  double slot_value = 1.0;
  EmbedMode mode = EmbedMode::Overwrite;

  int output_dim(int input_dim) const;
  // Throws InvalidSpec when the slots do not fit inside `input_dim`.
  void validate(int input_dim) const;
};

Vector embed_label(const Eigen::Ref<const Vector>& x, int label, const LabelEmbedSpec& spec);

// Row-wise embedding: row i of the result carries labels[i].
Matrix embed_labels(const Matrix& x, std::span<const int> labels, const LabelEmbedSpec& spec);
// Every row carries the same label (used by inference sweeps).
Matrix embed_labels(const Matrix& x, int label, const LabelEmbedSpec& spec);

struct PosNegBatch {
  Matrix x_pos;
  Matrix x_neg;
  std::vector<int> labels;
  std::vector<int> neg_labels;
};

// Uniform draw over the C-1 labels different from `label`.
int draw_negative_label(int label, int n_classes, Rng& rng);

PosNegBatch make_pos_neg_batch(std::span<const Sample> batch, const LabelEmbedSpec& spec, Rng& rng);

}  // namespace pnn
