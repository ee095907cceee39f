#include "dlspfi/acquisition.hpp"

#include "dlspfi/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace dlspfi {

namespace {

constexpr double kUnitTolerance = 1e-8;

void validate(const std::vector<QSample>& samples, double tau) {
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::kDomain, "diffusion time tau must be positive");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!(s.q >= 0.0) || !std::isfinite(s.q)) {
      throw Error(ErrorCode::kDomain,
                  "sample " + std::to_string(i) + " has invalid magnitude");
    }
    if (std::abs(s.u.norm() - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::kDomain,
                  "sample " + std::to_string(i) + " direction is not unit-norm");
    }
  }
  // Duplicate check on the q-vectors. Sorting keeps it O(S log S).
  std::vector<Eigen::Vector3d> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.vector());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  for (std::size_t i = 1; i < v.size(); ++i) {
    if ((v[i] - v[i - 1]).norm() <= 1e-12 * std::max(1.0, v[i].norm())) {
      throw Error(ErrorCode::kInvalidArgument, "scheme contains duplicate samples");
    }
  }
}

}  // namespace

AcquisitionScheme::AcquisitionScheme(std::vector<QSample> samples, double tau)
    : samples_(std::move(samples)), tau_(tau) {
  validate(samples_, tau_);
}

AcquisitionScheme AcquisitionScheme::from_vectors(const std::vector<Eigen::Vector3d>& qvecs,
                                                  double tau) {
  std::vector<QSample> samples;
  samples.reserve(qvecs.size());
  for (const auto& v : qvecs) {
    const double n = v.norm();
    samples.push_back(n > 0.0 ? QSample{n, v / n} : QSample{});
  }
  return AcquisitionScheme(std::move(samples), tau);
}

double AcquisitionScheme::max_q() const {
  double m = 0.0;
  for (const auto& s : samples_) m = std::max(m, s.q);
  return m;
}

double AcquisitionScheme::max_b() const { return b_value(max_q(), tau_); }

AcquisitionScheme read_scheme(std::istream& in, double tau) {
  std::vector<QSample> samples;
  std::string line;
  int line_no = 0;
  int columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> vals;
    double x;
    while (ls >> x) vals.push_back(x);
    if (!ls.eof()) {
      throw Error(ErrorCode::kParse, "scheme line " + std::to_string(line_no) +
                                         ": non-numeric token");
    }
    if (vals.empty()) continue;
    if (vals.size() != 3 && vals.size() != 4) {
      throw Error(ErrorCode::kParse, "scheme line " + std::to_string(line_no) +
                                         ": expected 3 or 4 columns");
    }
    if (columns == 0) columns = static_cast<int>(vals.size());
    if (columns != static_cast<int>(vals.size())) {
      throw Error(ErrorCode::kParse, "scheme line " + std::to_string(line_no) +
                                         ": mixed 3- and 4-column rows");
    }
    if (columns == 3) {
      const Eigen::Vector3d v(vals[0], vals[1], vals[2]);
      const double n = v.norm();
      samples.push_back(n > 0.0 ? QSample{n, v / n} : QSample{});
    } else {
      if (vals[0] < 0.0) {
        throw Error(ErrorCode::kDomain, "scheme line " + std::to_string(line_no) +
                                            ": negative b-value");
      }
      Eigen::Vector3d u(vals[1], vals[2], vals[3]);
      const double n = u.norm();
      if (vals[0] == 0.0) {
        samples.push_back(QSample{});
      } else if (n == 0.0) {
        throw Error(ErrorCode::kParse, "scheme line " + std::to_string(line_no) +
                                           ": zero direction with nonzero b");
      } else {
        samples.push_back(QSample{q_from_b(vals[0], tau), u / n});
      }
    }
  }
  return AcquisitionScheme(std::move(samples), tau);
}

AcquisitionScheme read_scheme(const std::filesystem::path& path, double tau) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scheme file: " + path.string());
  return read_scheme(in, tau);
}

void write_scheme(std::ostream& out, const AcquisitionScheme& scheme) {
  out << "# qx qy qz (mm^-1), tau=" << std::setprecision(17) << scheme.tau()
      << ", samples=" << scheme.size() << '\n';
  for (const auto& s : scheme) {
    const Eigen::Vector3d v = s.vector();
    out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
}

void write_scheme(const std::filesystem::path& path, const AcquisitionScheme& scheme) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write scheme file: " + path.string());
  write_scheme(out, scheme);
}

}  // namespace dlspfi
