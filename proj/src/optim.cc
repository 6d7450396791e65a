/*
 * Copyright 2026 The lambdaopt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lambdaopt/optim.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "binary_io.h"
#include "lambdaopt/error.h"

namespace lambdaopt {
namespace {

namespace bio = binary_io;

void CheckRows(const SparseRows& rows, std::string_view kind,
               std::uint64_t step) {
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (double v : rows.row_at(s)) {
      if (!std::isfinite(v)) {
        throw NonFiniteError("non-finite gradient at step " +
                             std::to_string(step) + " for " +
                             std::string(kind) + " " +
                             std::to_string(rows.id_at(s)));
      }
    }
  }
}

void CheckParameterRow(std::span<const double> row, std::string_view kind,
                       std::uint32_t id, std::uint64_t step) {
  for (double v : row) {
    if (!std::isfinite(v)) {
      throw NonFiniteError("parameters became non-finite at step " +
                           std::to_string(step) + " for " + std::string(kind) +
                           " " + std::to_string(id));
    }
  }
}

}  // namespace

void Optimizer::CheckFinite(const SparseGradient& grad) const {
  CheckRows(grad.users, "user", steps_ + 1);
  CheckRows(grad.items, "item", steps_ + 1);
}

// ---------------------------------------------------------------------------
// SGD

SgdOptimizer::SgdOptimizer(SgdOptions options) : options_(options) {
  if (!(options_.learning_rate > 0)) {
    throw ConfigError("SGD learning rate must be positive");
  }
}

void SgdOptimizer::RealUpdate(EmbeddingPair& theta,
                              const SparseGradient& grad) {
  CheckFinite(grad);
  const double eta = options_.learning_rate;
  auto apply = [&](Matrix& table, const SparseRows& rows,
                   std::string_view kind) {
    for (std::size_t s = 0; s < rows.size(); ++s) {
      auto w = table.row(rows.id_at(s));
      const auto g = rows.row_at(s);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= eta * g[k];
      CheckParameterRow(w, kind, rows.id_at(s), steps_ + 1);
    }
  };
  apply(theta.users, grad.users, "user");
  apply(theta.items, grad.items, "item");
  ++steps_;
}

SparseEmbedding SgdOptimizer::AssumedUpdate(const EmbeddingPair& theta,
                                            const SparseGradient& grad) const {
  CheckFinite(grad);
  const double eta = options_.learning_rate;
  SparseEmbedding out(theta.dim());
  auto apply = [&](const Matrix& table, const SparseRows& rows,
                   SparseRows& dst) {
    dst.Reserve(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
      const auto w = table.row(rows.id_at(s));
      const auto g = rows.row_at(s);
      auto o = dst.Append(rows.id_at(s));
      for (std::size_t k = 0; k < w.size(); ++k) o[k] = w[k] - eta * g[k];
    }
  };
  apply(theta.users, grad.users, out.users);
  apply(theta.items, grad.items, out.items);
  return out;
}

SparseEmbedding SgdOptimizer::LambdaSensitivity(
    const EmbeddingPair& theta, const SparseGradient& grad) const {
  const double eta = options_.learning_rate;
  SparseEmbedding out(theta.dim());
  auto apply = [&](const Matrix& table, const SparseRows& rows,
                   SparseRows& dst) {
    dst.Reserve(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
      const auto w = table.row(rows.id_at(s));
      auto o = dst.Append(rows.id_at(s));
      for (std::size_t k = 0; k < w.size(); ++k) o[k] = -2.0 * eta * w[k];
    }
  };
  apply(theta.users, grad.users, out.users);
  apply(theta.items, grad.items, out.items);
  return out;
}

std::unique_ptr<Optimizer> SgdOptimizer::Clone() const {
  return std::make_unique<SgdOptimizer>(*this);
}

std::uint64_t SgdOptimizer::StateHash() const {
  bio::Fnv1a h;
  h.String(name());
  h.Value(options_.learning_rate);
  h.Value(steps_);
  return h.hash();
}

void SgdOptimizer::Save(std::ostream& out) const {
  bio::WriteString(out, name());
  bio::Write(out, options_.learning_rate);
  bio::Write<std::uint64_t>(out, steps_);
}

// ---------------------------------------------------------------------------
// Adam

AdamOptimizer::AdamOptimizer(AdamOptions options, std::size_t num_users,
                             std::size_t num_items, std::size_t dim)
    : options_(options),
      s_users_(num_users, dim),
      s_items_(num_items, dim),
      r_users_(num_users, dim),
      r_items_(num_items, dim) {
  if (!(options_.learning_rate > 0)) {
    throw ConfigError("Adam learning rate must be positive");
  }
  if (!(options_.beta1 > 0 && options_.beta1 < 1 && options_.beta2 > 0 &&
        options_.beta2 < 1)) {
    throw ConfigError("Adam decay rates must lie in (0, 1)");
  }
  if (!(options_.epsilon >= 0)) {
    throw ConfigError("Adam epsilon must be nonnegative");
  }
}

double AdamOptimizer::BiasCorrection(std::uint64_t t) const {
  const double td = static_cast<double>(t);
  return std::sqrt(1.0 - std::pow(SecondMomentDecay(), td)) /
         (1.0 - std::pow(options_.beta1, td));
}

void AdamOptimizer::RealUpdate(EmbeddingPair& theta,
                               const SparseGradient& grad) {
  CheckFinite(grad);
  const double b1 = options_.beta1;
  const double b2 = SecondMomentDecay();
  const double step = options_.learning_rate * BiasCorrection(steps_ + 1);
  auto apply = [&](Matrix& table, Matrix& s, Matrix& r, const SparseRows& rows,
                   std::string_view kind) {
    for (std::size_t slot = 0; slot < rows.size(); ++slot) {
      const std::uint32_t id = rows.id_at(slot);
      auto w = table.row(id);
      auto sr = s.row(id);
      auto rr = r.row(id);
      const auto g = rows.row_at(slot);
      for (std::size_t k = 0; k < w.size(); ++k) {
        sr[k] = b1 * sr[k] + (1.0 - b1) * g[k];
        rr[k] = b2 * rr[k] + (1.0 - b2) * g[k] * g[k];
        w[k] -= step * sr[k] / (std::sqrt(rr[k]) + options_.epsilon);
      }
      CheckParameterRow(rr, kind, id, steps_ + 1);
      CheckParameterRow(w, kind, id, steps_ + 1);
    }
  };
  apply(theta.users, s_users_, r_users_, grad.users, "user");
  apply(theta.items, s_items_, r_items_, grad.items, "item");
  ++steps_;
}

SparseEmbedding AdamOptimizer::AssumedUpdate(const EmbeddingPair& theta,
                                             const SparseGradient& grad) const {
  CheckFinite(grad);
  const double b1 = options_.beta1;
  const double b2 = SecondMomentDecay();
  const double step = options_.learning_rate * BiasCorrection(steps_ + 1);
  SparseEmbedding out(theta.dim());
  auto apply = [&](const Matrix& table, const Matrix& s, const Matrix& r,
                   const SparseRows& rows, SparseRows& dst) {
    dst.Reserve(rows.size());
    for (std::size_t slot = 0; slot < rows.size(); ++slot) {
      const std::uint32_t id = rows.id_at(slot);
      const auto w = table.row(id);
      const auto sr = s.row(id);
      const auto rr = r.row(id);
      const auto g = rows.row_at(slot);
      auto o = dst.Append(id);
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double s_next = b1 * sr[k] + (1.0 - b1) * g[k];
        const double r_next = b2 * rr[k] + (1.0 - b2) * g[k] * g[k];
        o[k] = w[k] - step * s_next / (std::sqrt(r_next) + options_.epsilon);
      }
    }
  };
  apply(theta.users, s_users_, r_users_, grad.users, out.users);
  apply(theta.items, s_items_, r_items_, grad.items, out.items);
  return out;
}

SparseEmbedding AdamOptimizer::LambdaSensitivity(
    const EmbeddingPair& theta, const SparseGradient& grad) const {
  const double b1 = options_.beta1;
  const double b2 = SecondMomentDecay();
  const double eps = options_.epsilon;
  const double step = options_.learning_rate * BiasCorrection(steps_ + 1);
  SparseEmbedding out(theta.dim());
  auto apply = [&](const Matrix& table, const Matrix& s, const Matrix& r,
                   const SparseRows& rows, SparseRows& dst,
                   std::string_view kind) {
    dst.Reserve(rows.size());
    for (std::size_t slot = 0; slot < rows.size(); ++slot) {
      const std::uint32_t id = rows.id_at(slot);
      const auto w = table.row(id);
      const auto sr = s.row(id);
      const auto rr = r.row(id);
      const auto g = rows.row_at(slot);
      auto o = dst.Append(id);
      for (std::size_t k = 0; k < w.size(); ++k) {
        // g depends on lambda through + 2 * lambda * w.
        const double dg = 2.0 * w[k];
        const double s_next = b1 * sr[k] + (1.0 - b1) * g[k];
        const double r_next = b2 * rr[k] + (1.0 - b2) * g[k] * g[k];
        const double ds = (1.0 - b1) * dg;
        const double dr = (1.0 - b2) * 2.0 * g[k] * dg;
        const double root = std::sqrt(r_next);
        double droot = 0.0;
        if (root > 0) {
          droot = dr / (2.0 * root);
        } else if (eps == 0) {
          throw NonFiniteError("Adam sensitivity is singular for " +
                               std::string(kind) + " " + std::to_string(id) +
                               " (zero second moment and epsilon = 0)");
        }
        const double denom = root + eps;
        o[k] = -step * (ds * denom - s_next * droot) / (denom * denom);
      }
    }
  };
  apply(theta.users, s_users_, r_users_, grad.users, out.users, "user");
  apply(theta.items, s_items_, r_items_, grad.items, out.items, "item");
  return out;
}

std::unique_ptr<Optimizer> AdamOptimizer::Clone() const {
  return std::make_unique<AdamOptimizer>(*this);
}

std::uint64_t AdamOptimizer::StateHash() const {
  bio::Fnv1a h;
  h.String(name());
  h.Value(options_.learning_rate);
  h.Value(options_.beta1);
  h.Value(options_.beta2);
  h.Value(options_.epsilon);
  h.Value(options_.second_moment_uses_beta1);
  h.Value(steps_);
  h.Doubles(s_users_.values());
  h.Doubles(s_items_.values());
  h.Doubles(r_users_.values());
  h.Doubles(r_items_.values());
  return h.hash();
}

void AdamOptimizer::SetState(std::uint64_t steps, Matrix s_users,
                             Matrix s_items, Matrix r_users, Matrix r_items) {
  if (s_users.rows() != s_users_.rows() || s_users.cols() != s_users_.cols() ||
      s_items.rows() != s_items_.rows() || s_items.cols() != s_items_.cols() ||
      r_users.rows() != r_users_.rows() || r_users.cols() != r_users_.cols() ||
      r_items.rows() != r_items_.rows() || r_items.cols() != r_items_.cols()) {
    throw IncompatibleError("Adam moment shapes do not match");
  }
  steps_ = steps;
  s_users_ = std::move(s_users);
  s_items_ = std::move(s_items);
  r_users_ = std::move(r_users);
  r_items_ = std::move(r_items);
}

void AdamOptimizer::Save(std::ostream& out) const {
  bio::WriteString(out, name());
  bio::Write(out, options_.learning_rate);
  bio::Write(out, options_.beta1);
  bio::Write(out, options_.beta2);
  bio::Write(out, options_.epsilon);
  bio::Write<std::uint8_t>(out, options_.second_moment_uses_beta1 ? 1 : 0);
  bio::Write<std::uint64_t>(out, steps_);
  bio::WriteMatrix(out, s_users_);
  bio::WriteMatrix(out, s_items_);
  bio::WriteMatrix(out, r_users_);
  bio::WriteMatrix(out, r_items_);
}

std::unique_ptr<Optimizer> LoadOptimizer(std::istream& in) {
  const std::string kind = bio::ReadString(in);
  if (kind == "sgd") {
    SgdOptions options;
    options.learning_rate = bio::Read<double>(in);
    auto opt = std::make_unique<SgdOptimizer>(options);
    opt->set_steps(bio::Read<std::uint64_t>(in));
    return opt;
  }
  if (kind == "adam") {
    AdamOptions options;
    options.learning_rate = bio::Read<double>(in);
    options.beta1 = bio::Read<double>(in);
    options.beta2 = bio::Read<double>(in);
    options.epsilon = bio::Read<double>(in);
    options.second_moment_uses_beta1 = bio::Read<std::uint8_t>(in) != 0;
    const auto steps = bio::Read<std::uint64_t>(in);
    Matrix s_users = bio::ReadMatrix(in);
    Matrix s_items = bio::ReadMatrix(in);
    Matrix r_users = bio::ReadMatrix(in);
    Matrix r_items = bio::ReadMatrix(in);
    auto opt = std::make_unique<AdamOptimizer>(options, s_users.rows(),
                                               s_items.rows(), s_users.cols());
    opt->SetState(steps, std::move(s_users), std::move(s_items),
                  std::move(r_users), std::move(r_items));
    return opt;
  }
  throw IoError("unknown optimizer kind '" + kind + "' in checkpoint");
}

}  // namespace lambdaopt
