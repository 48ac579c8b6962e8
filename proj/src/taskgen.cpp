#include "ric/taskgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ric {

namespace {

using json = nlohmann::json;

// Internal generator model. Geometry is a deterministic function of the spec
// (no RNG), so datasets differ across seeds only through sampling.
struct TaskModel {
  TaskKind kind;
  int k;
  int d;
  double sigma;                // within-class spread (gaussian/ring)
  double margin;               // enforced margin (separable-linear)
  Eigen::MatrixXd centers;     // gaussian: K x d
  Eigen::MatrixXd anchors;     // separable: K x d unit rows
  Eigen::VectorXd radii;       // ring: K
  Eigen::VectorXd log_trunc;   // ring: log P(radius draw > 0 | class)
};

Eigen::MatrixXd circle_layout(int k, int d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, d);
  if (d == 1) {
    for (int i = 0; i < k; ++i) m(i, 0) = k == 1 ? 0.0 : 2.0 * i / (k - 1) - 1.0;
    return m;
  }
  for (int i = 0; i < k; ++i) {
    const double phi = 2.0 * M_PI * i / k;
    m(i, 0) = std::cos(phi);
    m(i, 1) = std::sin(phi);
  }
  return m;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

TaskModel build_model(const TaskSpec& spec) {
  TaskModel m;
  m.kind = spec.kind;
  m.k = spec.num_classes;
  m.d = spec.feature_dim;
  m.sigma = spec.overlap;
  m.margin = spec.overlap;
  switch (spec.kind) {
    case TaskKind::kGaussianMixture:
      m.centers = circle_layout(m.k, m.d);
      break;
    case TaskKind::kSeparableLinear:
      m.anchors = circle_layout(m.k, m.d);
      break;
    case TaskKind::kRing: {
      m.radii.resize(m.k);
      m.log_trunc.resize(m.k);
      for (int i = 0; i < m.k; ++i) {
        m.radii[i] = 1.0 + 2.0 * i;
        m.log_trunc[i] = std::log(std_normal_cdf(m.radii[i] / m.sigma));
      }
      break;
    }
  }
  return m;
}

SimplexVector posterior_from_log_weights(Eigen::ArrayXd lw) {
  lw -= lw.maxCoeff();
  Eigen::ArrayXd p = lw.exp();
  p /= p.sum();
  return SimplexVector(std::move(p));
}

// q(.|x) for tasks with an analytic conditional. Ring posteriors depend on x
// only through the planar radius.
SimplexVector posterior(const TaskModel& m, const Eigen::VectorXd& x) {
  switch (m.kind) {
    case TaskKind::kGaussianMixture: {
      Eigen::ArrayXd lw(m.k);
      for (int j = 0; j < m.k; ++j) {
        lw[j] = -(x - m.centers.row(j).transpose()).squaredNorm() /
                (2.0 * m.sigma * m.sigma);
      }
      return posterior_from_log_weights(std::move(lw));
    }
    case TaskKind::kSeparableLinear: {
      Eigen::VectorXd scores = m.anchors * x;
      int best = 0;
      scores.maxCoeff(&best);
      return SimplexVector::one_hot(m.k, best);
    }
    case TaskKind::kRing: {
      const double r = x.head(2).norm();
      Eigen::ArrayXd lw(m.k);
      for (int j = 0; j < m.k; ++j) {
        const double z = (r - m.radii[j]) / m.sigma;
        lw[j] = -0.5 * z * z - m.log_trunc[j];
      }
      return posterior_from_log_weights(std::move(lw));
    }
  }
  throw std::logic_error("posterior: unknown task kind");
}

Eigen::VectorXd sample_input(const TaskModel& m, Rng& rng) {
  Eigen::VectorXd x(m.d);
  switch (m.kind) {
    case TaskKind::kGaussianMixture: {
      const int comp = static_cast<int>(rng.below(m.k));
      for (int i = 0; i < m.d; ++i) x[i] = m.centers(comp, i) + m.sigma * rng.normal();
      return x;
    }
    case TaskKind::kSeparableLinear: {
      // Rejection: keep draws whose best-vs-runner-up score gap clears the
      // margin, so the anchor classifier separates the data by construction.
      for (;;) {
        for (int i = 0; i < m.d; ++i) x[i] = 2.0 * rng.normal();
        Eigen::VectorXd scores = m.anchors * x;
        int best = 0;
        const double top = scores.maxCoeff(&best);
        scores[best] = -std::numeric_limits<double>::infinity();
        if (top - scores.maxCoeff() >= m.margin) return x;
      }
    }
    case TaskKind::kRing: {
      const int comp = static_cast<int>(rng.below(m.k));
      double r;
      do {
        r = m.radii[comp] + m.sigma * rng.normal();
      } while (r <= 0.0);
      const double phi = rng.uniform(0.0, 2.0 * M_PI);
      x[0] = r * std::cos(phi);
      x[1] = r * std::sin(phi);
      for (int i = 2; i < m.d; ++i) x[i] = rng.normal();
      return x;
    }
  }
  throw std::logic_error("sample_input: unknown task kind");
}

int sample_label(const SimplexVector& q, Rng& rng) {
  double u = rng.uniform01();
  for (int j = 0; j < q.size(); ++j) {
    u -= q[j];
    if (u <= 0.0) return j;
  }
  return q.size() - 1;
}

ExampleList sample_split(const TaskModel& m, int count, Rng& rng) {
  ExampleList out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    LabeledExample ex;
    ex.features = sample_input(m, rng);
    ex.bayes_posterior = posterior(m, ex.features);
    ex.label = sample_label(*ex.bayes_posterior, rng);
    out.push_back(std::move(ex));
  }
  return out;
}

[[noreturn]] void csv_error(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "gaussian-mixture") return TaskKind::kGaussianMixture;
  if (s == "separable-linear") return TaskKind::kSeparableLinear;
  if (s == "ring") return TaskKind::kRing;
  throw std::invalid_argument("unknown task kind: " + s);
}

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::kGaussianMixture: return "gaussian-mixture";
    case TaskKind::kSeparableLinear: return "separable-linear";
    case TaskKind::kRing: return "ring";
  }
  return "?";
}

void TaskSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("TaskSpec: need at least 2 classes");
  if (feature_dim < 1) throw std::invalid_argument("TaskSpec: need at least 1 feature");
  if (kind == TaskKind::kRing && feature_dim < 2) {
    throw std::invalid_argument("TaskSpec: ring task needs feature_dim >= 2");
  }
  if (!(overlap > 0.0)) throw std::invalid_argument("TaskSpec: overlap must be positive");
  if (noise_rate < 0.0 || noise_rate >= 1.0) {
    throw std::invalid_argument("TaskSpec: noise rate must be in [0,1)");
  }
  if (num_train < 0 || num_val < 0 || num_test < 0 ||
      num_train + num_val + num_test == 0) {
    throw std::invalid_argument("TaskSpec: sample counts must be nonnegative and not all zero");
  }
}

Dataset generate(const TaskSpec& spec) {
  spec.validate();
  const TaskModel model = build_model(spec);

  Dataset ds;
  ds.spec = spec;
  {
    Rng rng = Rng::substream(spec.seed, {1});
    ds.train = sample_split(model, spec.num_train, rng);
  }
  {
    Rng rng = Rng::substream(spec.seed, {2});
    ds.val = sample_split(model, spec.num_val, rng);
  }
  {
    Rng rng = Rng::substream(spec.seed, {3});
    ds.test = sample_split(model, spec.num_test, rng);
  }

  // Standardize per dimension with train moments.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(spec.feature_dim);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(spec.feature_dim);
  if (!ds.train.empty()) {
    for (const auto& ex : ds.train) mean += ex.features;
    mean /= static_cast<double>(ds.train.size());
    for (const auto& ex : ds.train) {
      var += (ex.features - mean).cwiseAbs2();
    }
    var /= static_cast<double>(ds.train.size());
  } else {
    var.setOnes();
  }
  Eigen::VectorXd sd = var.cwiseSqrt().cwiseMax(1e-12);
  auto standardize = [&](ExampleList& split) {
    for (auto& ex : split) {
      ex.features = (ex.features - mean).cwiseQuotient(sd);
    }
  };
  standardize(ds.train);
  standardize(ds.val);
  standardize(ds.test);

  if (spec.kind == TaskKind::kSeparableLinear) {
    // Re-express the anchor classifier in standardized coordinates.
    Eigen::MatrixXd w(spec.num_classes, spec.feature_dim);
    Eigen::VectorXd b(spec.num_classes);
    for (int kk = 0; kk < spec.num_classes; ++kk) {
      w.row(kk) = model.anchors.row(kk).cwiseProduct(sd.transpose());
      b[kk] = model.anchors.row(kk).dot(mean);
    }
    ds.separator_weights = std::move(w);
    ds.separator_offsets = std::move(b);
  }

  if (spec.noise_rate > 0.0) {
    Rng noise_train = Rng::substream(spec.seed, {4, 0});
    inject_label_noise(ds.train, spec.noise_rate, noise_train);
    Rng noise_val = Rng::substream(spec.seed, {4, 1});
    inject_label_noise(ds.val, spec.noise_rate, noise_val);
  }
  return ds;
}

void inject_label_noise(ExampleList& examples, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("inject_label_noise: rate must be in [0,1)");
  }
  if (rate == 0.0 || examples.empty()) return;
  const int k = examples.empty() ? 0
                                 : (examples[0].bayes_posterior
                                        ? examples[0].bayes_posterior->size()
                                        : 0);
  for (auto& ex : examples) {
    if (rng.uniform01() >= rate) continue;
    int classes = k;
    if (classes == 0) {
      // No posterior to read K from: derive from the largest label seen.
      for (const auto& e : examples) classes = std::max(classes, e.label + 1);
    }
    const int offset = 1 + static_cast<int>(rng.below(classes - 1));
    ex.label = (ex.label + offset) % classes;
  }
}

ExampleList load_csv(const std::string& path, int feature_dim, int num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  ExampleList out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("feature_0", 0) == 0) continue;  // header

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != feature_dim + 1) {
      csv_error(path, lineno,
                "expected " + std::to_string(feature_dim + 1) + " fields, got " +
                    std::to_string(fields.size()));
    }

    LabeledExample ex;
    ex.features.resize(feature_dim);
    for (int i = 0; i < feature_dim; ++i) {
      size_t pos = 0;
      try {
        ex.features[i] = std::stod(fields[i], &pos);
      } catch (const std::exception&) {
        csv_error(path, lineno, "non-numeric field '" + fields[i] + "'");
      }
      if (pos != fields[i].size()) {
        csv_error(path, lineno, "non-numeric field '" + fields[i] + "'");
      }
    }
    size_t pos = 0;
    int label = 0;
    try {
      label = std::stoi(fields[feature_dim], &pos);
    } catch (const std::exception&) {
      csv_error(path, lineno, "non-numeric label '" + fields[feature_dim] + "'");
    }
    if (pos != fields[feature_dim].size()) {
      csv_error(path, lineno, "non-numeric label '" + fields[feature_dim] + "'");
    }
    if (label < 0 || label >= num_classes) {
      csv_error(path, lineno,
                "label " + std::to_string(label) + " out of range [0," +
                    std::to_string(num_classes) + ")");
    }
    ex.label = label;
    out.push_back(std::move(ex));
  }
  return out;
}

void save_csv(const ExampleList& examples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  const int d = examples.empty() ? 0 : static_cast<int>(examples[0].features.size());
  for (int i = 0; i < d; ++i) out << "feature_" << i << ",";
  out << "label\n";
  char buf[32];
  for (const auto& ex : examples) {
    for (int i = 0; i < d; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", ex.features[i]);
      out << buf << ",";
    }
    out << ex.label << "\n";
  }
}

void save_sidecar_json(const Dataset& ds, const ExampleList& examples,
                       const std::string& path) {
  json j;
  j["task_spec"] = {
      {"kind", to_string(ds.spec.kind)},
      {"classes", ds.spec.num_classes},
      {"features", ds.spec.feature_dim},
      {"overlap", ds.spec.overlap},
      {"noise_rate", ds.spec.noise_rate},
      {"train", ds.spec.num_train},
      {"val", ds.spec.num_val},
      {"test", ds.spec.num_test},
      {"seed", ds.spec.seed},
  };
  if (!examples.empty() && examples[0].bayes_posterior) {
    json rows = json::array();
    for (const auto& ex : examples) {
      json row = json::array();
      for (int i = 0; i < ex.bayes_posterior->size(); ++i) {
        row.push_back((*ex.bayes_posterior)[i]);
      }
      rows.push_back(std::move(row));
    }
    j["bayes_posterior"] = std::move(rows);
  } else {
    j["bayes_posterior"] = nullptr;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_sidecar_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

double estimate_bayes_error(const TaskSpec& spec, int samples, std::uint64_t seed) {
  spec.validate();
  const TaskModel model = build_model(spec);
  Rng rng = Rng::substream(seed, {9});
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd x = sample_input(model, rng);
    acc += 1.0 - posterior(model, x).confidence();
  }
  return acc / samples;
}

double estimate_mean_posterior_entropy(const TaskSpec& spec, int samples,
                                       std::uint64_t seed) {
  spec.validate();
  const TaskModel model = build_model(spec);
  Rng rng = Rng::substream(seed, {10});
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) {
    acc += entropy(posterior(model, sample_input(model, rng)));
  }
  return acc / samples;
}

}  // namespace ric
