#include "inferno/synthgen/generator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "inferno/common/rng.hpp"

namespace inferno::synthgen {

LabeledDataset sample_signal(Eigen::Index count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("sample_signal: negative count");
  RandomStream rng(seed, "signal");
  LabeledDataset ds;
  ds.seed = seed;
  ds.x.resize(count, 3);
  ds.labels.assign(static_cast<std::size_t>(count), kSignalLabel);
  for (Eigen::Index i = 0; i < count; ++i) {
    ds.x(i, 0) = 1.0 + rng.normal();
    ds.x(i, 1) = 1.0 + rng.normal();
    ds.x(i, 2) = rng.exponential(2.0);
  }
  return ds;
}

LabeledDataset sample_background(Eigen::Index count, std::uint64_t seed, double r, double lambda) {
  if (count < 0) throw std::invalid_argument("sample_background: negative count");
  if (lambda <= 0.0) throw std::domain_error("sample_background: lambda must be positive");
  RandomStream rng(seed, "background");
  LabeledDataset ds;
  ds.seed = seed;
  ds.r0 = r;
  ds.lambda0 = lambda;
  ds.x.resize(count, 3);
  ds.labels.assign(static_cast<std::size_t>(count), kBackgroundLabel);
  const double sd0 = std::sqrt(5.0), sd1 = 3.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    ds.x(i, 0) = 2.0 + r + sd0 * rng.normal();
    ds.x(i, 1) = sd1 * rng.normal();
    ds.x(i, 2) = rng.exponential(lambda);
  }
  return ds;
}

void apply_nuisance_transform(ObservationMatrix& bkg, double r0, double lambda0, double r,
                              double lambda) {
  if (lambda <= 0.0) throw std::domain_error("apply_nuisance_transform: lambda must be positive");
  const double shift = r - r0;
  const double scale = lambda0 / lambda;
  bkg.col(0).array() += shift;
  bkg.col(2) *= scale;
}

void apply_nuisance_transform(LabeledDataset& batch, double r, double lambda) {
  if (lambda <= 0.0) throw std::domain_error("apply_nuisance_transform: lambda must be positive");
  const double shift = r - batch.r0;
  const double scale = batch.lambda0 / lambda;
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    if (batch.labels[static_cast<std::size_t>(i)] != kBackgroundLabel) continue;
    batch.x(i, 0) += shift;
    batch.x(i, 2) *= scale;
  }
}

Eigen::Index poisson_draw(RandomStream& rng, double mean) {
  if (mean < 0.0) throw std::domain_error("poisson_draw: negative mean");
  // split large means so the product method never underflows
  Eigen::Index total = 0;
  while (mean > 30.0) {
    const double half = mean / 2.0;
    total += poisson_draw(rng, half);
    mean -= half;
  }
  const double limit = std::exp(-mean);
  double prod = rng.uniform_pos();
  Eigen::Index n = 0;
  while (prod > limit) {
    prod *= rng.uniform_pos();
    ++n;
  }
  return total + n;
}

LabeledDataset mixture_sample(std::optional<Eigen::Index> n, double s, double b, double r,
                              double lambda, std::uint64_t seed) {
  if (s < 0.0 || b <= 0.0 || s + b <= 0.0)
    throw std::domain_error("mixture_sample: need s >= 0 and b > 0");
  if (lambda <= 0.0) throw std::domain_error("mixture_sample: lambda must be positive");
  RandomStream rng(seed, "mixture");
  const Eigen::Index total = n ? *n : poisson_draw(rng, s + b);
  const double p_signal = s / (s + b);
  LabeledDataset ds;
  ds.seed = seed;
  ds.r0 = r;
  ds.lambda0 = lambda;
  ds.x.resize(total, 3);
  ds.labels.resize(static_cast<std::size_t>(total));
  const double sd0 = std::sqrt(5.0), sd1 = 3.0;
  for (Eigen::Index i = 0; i < total; ++i) {
    const bool sig = rng.uniform() < p_signal;
    ds.labels[static_cast<std::size_t>(i)] = sig ? kSignalLabel : kBackgroundLabel;
    if (sig) {
      ds.x(i, 0) = 1.0 + rng.normal();
      ds.x(i, 1) = 1.0 + rng.normal();
      ds.x(i, 2) = rng.exponential(2.0);
    } else {
      ds.x(i, 0) = 2.0 + r + sd0 * rng.normal();
      ds.x(i, 1) = sd1 * rng.normal();
      ds.x(i, 2) = rng.exponential(lambda);
    }
  }
  return ds;
}

void write_csv(const std::string& path, const LabeledDataset& ds) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  std::fputs("x0,x1,x2,label\n", f);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%c\n", ds.x(i, 0), ds.x(i, 1), ds.x(i, 2),
                 ds.labels[static_cast<std::size_t>(i)] == kSignalLabel ? 's' : 'b');
  }
  std::fclose(f);
}

LabeledDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x0,x1,x2,label", 0) != 0)
    throw std::runtime_error("read_csv: bad header in " + path);
  std::vector<std::array<double, 3>> rows;
  std::vector<std::uint8_t> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 3> v{};
    char lab = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%c", &v[0], &v[1], &v[2], &lab) != 4)
      throw std::runtime_error("read_csv: bad row in " + path);
    rows.push_back(v);
    labels.push_back(lab == 's' ? kSignalLabel : kBackgroundLabel);
  }
  LabeledDataset ds;
  ds.x.resize(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < 3; ++j) ds.x(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  ds.labels = std::move(labels);
  return ds;
}

namespace {
constexpr char kMagic[4] = {'I', 'N', 'F', 'D'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_binary(const std::string& path, const LabeledDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_binary: cannot open " + path);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  const std::uint64_t count = static_cast<std::uint64_t>(ds.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    double row[3] = {ds.x(i, 0), ds.x(i, 1), ds.x(i, 2)};
    out.write(reinterpret_cast<const char*>(row), sizeof(row));
    const char lab = ds.labels[static_cast<std::size_t>(i)] == kSignalLabel ? 's' : 'b';
    out.write(&lab, 1);
  }
}

LabeledDataset read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_binary: cannot open " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
    throw std::runtime_error("read_binary: bad header in " + path);
  LabeledDataset ds;
  ds.x.resize(static_cast<Eigen::Index>(count), 3);
  ds.labels.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    double row[3];
    char lab = 0;
    in.read(reinterpret_cast<char*>(row), sizeof(row));
    in.read(&lab, 1);
    if (!in) throw std::runtime_error("read_binary: truncated file " + path);
    for (int j = 0; j < 3; ++j) ds.x(static_cast<Eigen::Index>(i), j) = row[j];
    ds.labels[i] = lab == 's' ? kSignalLabel : kBackgroundLabel;
  }
  return ds;
}

}  // namespace inferno::synthgen
