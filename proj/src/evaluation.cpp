// SPDX-License-Identifier: Apache-2.0
#include "odn/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace odn {

namespace {

void require_same(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw DimensionError(std::string(what) + ": prediction " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + " vs truth " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols));
  }
}

}  // namespace

double relative_l2(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw DimensionError("relative_l2: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (!(den > 0.0)) throw DegenerateError("relative_l2: truth has zero norm");
  return std::sqrt(num) / std::sqrt(den);
}

std::vector<double> relative_l2_rows(const Matrix& preds, const Matrix& truths) {
  require_same(preds, truths, "relative_l2_rows");
  std::vector<double> out(preds.rows);
  for (std::size_t i = 0; i < preds.rows; ++i) {
    try {
      out[i] = relative_l2(preds.row(i), truths.row(i));
    } catch (const DegenerateError&) {
      throw DegenerateError("relative_l2: truth row " + std::to_string(i) + " has zero norm");
    }
  }
  return out;
}

double mean_relative_l2(const Matrix& preds, const Matrix& truths) {
  const auto errs = relative_l2_rows(preds, truths);
  if (errs.empty()) throw DimensionError("mean_relative_l2: no functions");
  double total = 0.0;
  for (double e : errs) total += e;
  return 100.0 * total / static_cast<double>(errs.size());
}

Matrix vector_field_magnitude(const Matrix& field, std::size_t components) {
  if (components == 0 || field.cols % components != 0) {
    throw DimensionError("vector_field_magnitude: width not divisible by component count");
  }
  const std::size_t ny = field.cols / components;
  Matrix out(field.rows, ny);
  for (std::size_t i = 0; i < field.rows; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < components; ++c) {
        const double v = field(i, j * components + c);
        s += v * v;
      }
      out(i, j) = std::sqrt(s);
    }
  }
  return out;
}

std::vector<double> spatial_mse(const Matrix& preds, const Matrix& truths) {
  require_same(preds, truths, "spatial_mse");
  if (preds.rows == 0) throw DimensionError("spatial_mse: no functions");
  std::vector<double> out(preds.cols, 0.0);
  for (std::size_t i = 0; i < preds.rows; ++i) {
    for (std::size_t j = 0; j < preds.cols; ++j) {
      const double d = preds(i, j) - truths(i, j);
      out[j] += d * d;
    }
  }
  for (auto& v : out) v /= static_cast<double>(preds.rows);
  return out;
}

EvalReport evaluate_predictions(const Matrix& preds, const Matrix& truths,
                                std::size_t components) {
  const Matrix p = components > 1 ? vector_field_magnitude(preds, components) : preds;
  const Matrix t = components > 1 ? vector_field_magnitude(truths, components) : truths;
  EvalReport r;
  r.per_function = relative_l2_rows(p, t);
  if (r.per_function.empty()) throw DimensionError("evaluate: no functions");
  double total = 0.0;
  for (double e : r.per_function) total += e;
  const double mean = total / static_cast<double>(r.per_function.size());
  double var = 0.0;
  for (double e : r.per_function) var += (e - mean) * (e - mean);
  var /= static_cast<double>(r.per_function.size());
  r.mean_pct = 100.0 * mean;
  r.std_pct = 100.0 * std::sqrt(var);
  r.spatial_mse = spatial_mse(p, t);
  return r;
}

EvalReport evaluate(const EnsembleModel& model, const OperatorDataset& data, std::size_t first,
                    std::size_t count) {
  if (data.components != 1) {
    throw DimensionError("model predictions are scalar; dataset has c=" +
                         std::to_string(data.components));
  }
  const OperatorDataset part = data.slice(first, count);
  const auto start = std::chrono::steady_clock::now();
  const Matrix preds = model.predict(part.U, part.Y).to_matrix();
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  EvalReport r = evaluate_predictions(preds, part.V, 1);
  r.inference_seconds = took.count();
  return r;
}

void EvalReport::write_csv(std::ostream& os) const {
  os << "function,relative_l2\n";
  char line[64];
  for (std::size_t i = 0; i < per_function.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", i, per_function[i]);
    os << line;
  }
}

std::string format_sig3(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", value);
  return buf;
}

std::string EvalReport::summary_line(const std::string& dataset, const std::string& model) const {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.6g", inference_seconds);
  return dataset + "," + model + "," + format_sig3(mean_pct) + "," + format_sig3(std_pct) + "," +
         secs;
}

}  // namespace odn
