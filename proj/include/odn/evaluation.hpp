// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "odn/dataset.hpp"
#include "odn/trunks.hpp"

namespace odn {

/// ||pred - truth||_2 / ||truth||_2. Throws DegenerateError for zero truth.
double relative_l2(std::span<const double> pred, std::span<const double> truth);

/// Per-row relative l2 errors (fractions, not percentages).
std::vector<double> relative_l2_rows(const Matrix& preds, const Matrix& truths);

/// 100 x mean of the per-row relative l2 errors.
double mean_relative_l2(const Matrix& preds, const Matrix& truths);

/// Euclidean norm over the component axis: (N x N_y*c) -> (N x N_y).
Matrix vector_field_magnitude(const Matrix& field, std::size_t components);

/// e(y) = mean over functions of (pred(y) - truth(y))^2.
std::vector<double> spatial_mse(const Matrix& preds, const Matrix& truths);

struct EvalReport {
  std::vector<double> per_function;  // relative l2, fractions
  double mean_pct = 0.0;
  double std_pct = 0.0;              // population standard deviation
  std::vector<double> spatial_mse;
  double inference_seconds = 0.0;

  void write_csv(std::ostream& os) const;
  std::string summary_line(const std::string& dataset, const std::string& model) const;
};

/// Metrics for precomputed predictions. Vector-valued data (c > 1) are reduced
/// to pointwise magnitudes first.
EvalReport evaluate_predictions(const Matrix& preds, const Matrix& truths,
                                std::size_t components = 1);

/// Runs the model on rows [first, first+count) of `data` and scores it.
EvalReport evaluate(const EnsembleModel& model, const OperatorDataset& data, std::size_t first,
                    std::size_t count);

/// Three significant digits.
std::string format_sig3(double value);

}  // namespace odn
