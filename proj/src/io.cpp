#include "dlspfi/io.hpp"

#include "dlspfi/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dlspfi {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kNotConverged: return "not_converged";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kVersion: return "version";
  }
  return "unknown";
}

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

nlohmann::json spec_to_json(const SPFBasisSpec& spec) {
  return {{"N", spec.radial_order},
          {"L", spec.angular_order},
          {"zeta", spec.zeta},
          {"tau", spec.tau}};
}

SPFBasisSpec spec_from_json(const nlohmann::json& j) {
  SPFBasisSpec s;
  s.radial_order = j.at("N").get<int>();
  s.angular_order = j.at("L").get<int>();
  s.zeta = j.at("zeta").get<double>();
  s.tau = j.at("tau").get<double>();
  s.validate();
  return s;
}

std::string_view to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::kFull: return "full";
    case CoefficientKind::kStripped: return "stripped";
    case CoefficientKind::kDictionary: return "dictionary";
  }
  return "unknown";
}

nlohmann::json coefficients_to_json(const CoefficientVector& c) {
  nlohmann::json j = spec_to_json(c.spec());
  j["kind"] = to_string(c.kind());
  j["values"] = std::vector<double>(c.values().data(), c.values().data() + c.size());
  return j;
}

CoefficientVector coefficients_from_json(const nlohmann::json& j) {
  try {
    const SPFBasisSpec spec = spec_from_json(j);
    const auto kind_name = j.at("kind").get<std::string>();
    CoefficientKind kind;
    if (kind_name == "full") kind = CoefficientKind::kFull;
    else if (kind_name == "stripped") kind = CoefficientKind::kStripped;
    else if (kind_name == "dictionary") kind = CoefficientKind::kDictionary;
    else throw Error(ErrorCode::kParse, "unknown coefficient kind '" + kind_name + "'");
    const auto v = j.at("values").get<std::vector<double>>();
    return CoefficientVector(kind, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), spec);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed coefficient record: ") + e.what());
  }
}

void write_array_file(const std::filesystem::path& path, const nlohmann::json& header,
                      const Eigen::MatrixXd& data) {
  static_assert(std::endian::native == std::endian::little, "array files assume little-endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file: " + path.string());
  nlohmann::json h = header;
  h["rows"] = data.rows();
  h["columns"] = data.cols();
  out << h.dump() << '\n';
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::pair<nlohmann::json, Eigen::MatrixXd> read_array_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "empty file: " + path.string());
  nlohmann::json header;
  Eigen::Index rows = 0, cols = 0;
  try {
    header = nlohmann::json::parse(line);
    rows = header.at("rows").get<Eigen::Index>();
    cols = header.at("columns").get<Eigen::Index>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "malformed header in " + path.string() + ": " + e.what());
  }
  if (rows < 0 || cols < 0) throw Error(ErrorCode::kParse, "negative shape in " + path.string());
  Eigen::MatrixXd data(rows, cols);
  const auto bytes = static_cast<std::streamsize>(data.size() * sizeof(double));
  in.read(reinterpret_cast<char*>(data.data()), bytes);
  if (in.gcount() != bytes) {
    throw Error(ErrorCode::kParse, "truncated payload in " + path.string());
  }
  return {std::move(header), std::move(data)};
}

void write_signal_file(const std::filesystem::path& path, const SignalFile& f) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write signal file: " + path.string());
  out << "# dlspfi-signals v1\n";
  out << "scheme " << (f.scheme_ref.empty() ? "-" : f.scheme_ref) << '\n';
  out << "voxels " << f.voxels.size() << '\n';
  out << "samples " << f.sample_count() << '\n';
  out << std::setprecision(17);
  for (const auto& row : f.voxels) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
    out << '\n';
  }
}

SignalFile read_signal_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open signal file: " + path.string());
  auto fail = [&](const std::string& what) {
    return Error(ErrorCode::kParse, "signal file " + path.string() + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || trim(line) != "# dlspfi-signals v1") {
    throw fail("missing '# dlspfi-signals v1' header");
  }
  SignalFile f;
  std::size_t voxels = 0, samples = 0;
  std::string key;
  if (!(in >> key >> f.scheme_ref) || key != "scheme") throw fail("expected 'scheme'");
  if (!(in >> key >> voxels) || key != "voxels") throw fail("expected 'voxels'");
  if (!(in >> key >> samples) || key != "samples") throw fail("expected 'samples'");
  f.voxels.assign(voxels, std::vector<double>(samples));
  for (std::size_t v = 0; v < voxels; ++v)
    for (std::size_t s = 0; s < samples; ++s)
      if (!(in >> f.voxels[v][s])) throw fail("truncated at voxel " + std::to_string(v));
  double extra;
  if (in >> extra) throw fail("more values than the header declares");
  return f;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace dlspfi
