#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hrb/io.hpp"

namespace hrb {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "HRBARTIFACT\n";
constexpr std::string_view kEnd = "\nHRBEND\n";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_f64(const std::string& in, std::size_t pos) {
  return std::bit_cast<double>(get_u64(in, pos));
}

}  // namespace

void ArtifactContainer::put(const std::string& name, const Matrix& a, const std::string& tag) {
  arrays[name] = a;
  if (!tag.empty()) tags[name] = tag;
}

const Matrix& ArtifactContainer::get(const std::string& name) const {
  const auto it = arrays.find(name);
  if (it == arrays.end()) throw ContainerError("container: no array named '" + name + "'");
  return it->second;
}

std::string ArtifactContainer::serialize() const {
  std::string payload;
  json entries = json::array();
  for (const auto& [name, a] : arrays) {
    json e = {{"name", name},
              {"rows", a.rows()},
              {"cols", a.cols()},
              {"offset", payload.size()},
              {"dtype", "float64-le"},
              {"order", "column-major"}};
    if (const auto t = tags.find(name); t != tags.end()) e["inner_product"] = t->second;
    entries.push_back(e);
    for (Eigen::Index i = 0; i < a.size(); ++i) put_f64(payload, a.data()[i]);
  }
  const json manifest = {{"format", "hrb-artifact"},
                         {"version", kVersion},
                         {"config_hash", config_hash},
                         {"meta", meta},
                         {"arrays", entries},
                         {"payload_bytes", payload.size()},
                         {"payload_sha256", sha256_hex(payload)}};
  const std::string text = manifest.dump(1);
  std::string out(kMagic);
  put_u64(out, text.size());
  out += text;
  out += payload;
  out += kEnd;
  return out;
}

ArtifactContainer ArtifactContainer::deserialize(const std::string& bytes,
                                                 const std::optional<std::string>& expected_hash) {
  if (bytes.size() < kMagic.size() + 8 + kEnd.size() || bytes.compare(0, kMagic.size(), kMagic) != 0)
    throw ContainerError("container: not an artifact file");
  const std::uint64_t mlen = get_u64(bytes, kMagic.size());
  const std::size_t mstart = kMagic.size() + 8;
  if (mlen > bytes.size() - mstart) throw ContainerError("container: truncated manifest");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(mstart, mlen));
  } catch (const json::parse_error&) {
    throw ContainerError("container: unreadable manifest");
  }
  ArtifactContainer c;
  std::uint64_t payload_bytes = 0;
  std::string payload_hash;
  try {
    if (manifest.at("format") != "hrb-artifact") throw ContainerError("container: wrong format tag");
    const int version = manifest.at("version").get<int>();
    if (version != kVersion)
      throw ContainerError("container: unsupported version " + std::to_string(version));
    c.config_hash = manifest.at("config_hash").get<std::string>();
    c.meta = manifest.at("meta").get<std::map<std::string, std::string>>();
    payload_bytes = manifest.at("payload_bytes").get<std::uint64_t>();
    payload_hash = manifest.at("payload_sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw ContainerError(std::string("container: malformed manifest: ") + e.what());
  }
  const std::size_t pstart = mstart + mlen;
  if (bytes.size() != pstart + payload_bytes + kEnd.size() ||
      bytes.compare(pstart + payload_bytes, kEnd.size(), kEnd) != 0)
    throw ContainerError("container: file is truncated or has trailing data");
  const std::string payload = bytes.substr(pstart, payload_bytes);
  if (sha256_hex(payload) != payload_hash) throw ContainerError("container: payload checksum mismatch");
  if (expected_hash && *expected_hash != c.config_hash)
    throw ContainerError("container: config hash " + c.config_hash + " does not match " +
                         *expected_hash);

  std::uint64_t expected_offset = 0;
  for (const json& e : manifest.at("arrays")) {
    const std::string name = e.at("name").get<std::string>();
    const auto rows = e.at("rows").get<std::int64_t>(), cols = e.at("cols").get<std::int64_t>();
    const auto offset = e.at("offset").get<std::uint64_t>();
    if (rows < 0 || cols < 0 || offset != expected_offset ||
        static_cast<std::uint64_t>(rows * cols) * 8 > payload_bytes - offset)
      throw ContainerError("container: array '" + name + "' does not fit the payload");
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = get_f64(payload, offset + 8 * i);
    expected_offset = offset + 8 * static_cast<std::uint64_t>(a.size());
    if (e.contains("inner_product")) c.tags[name] = e.at("inner_product").get<std::string>();
    c.arrays.emplace(name, std::move(a));
  }
  if (expected_offset != payload_bytes)
    throw ContainerError("container: payload size does not match the array shapes");
  return c;
}

void ArtifactContainer::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  // Write to a sibling file first so a crash never leaves a partial artifact in place.
  const std::filesystem::path tmp = path.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ContainerError("container: cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ContainerError("container: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ArtifactContainer ArtifactContainer::load(const std::filesystem::path& path,
                                          const std::optional<std::string>& expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError("container: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str(), expected_hash);
}

ArtifactContainer pack_greedy(const GreedyResult& res, const std::string& config_hash) {
  ArtifactContainer c;
  c.config_hash = config_hash;
  const NestedBases& b = res.model.bases;
  c.put("basis_y", b.y, "S_y");
  c.put("basis_q", b.q, "S_q");
  c.put("deim_basis", res.model.deim.basis, "euclidean");
  Matrix pts(static_cast<Eigen::Index>(res.model.deim.points.size()), 1);
  for (std::size_t i = 0; i < res.model.deim.points.size(); ++i)
    pts(static_cast<Eigen::Index>(i), 0) = res.model.deim.points[i];
  c.put("deim_points", pts);
  c.put("f_compressed", res.f_compressed, "euclidean");
  Matrix sig(2, 1);
  sig << res.calibration.sigma_y, res.calibration.sigma_q;
  c.put("sigma", sig);
  c.meta["kind"] = "greedy";
  c.meta["ly"] = std::to_string(b.ly);
  c.meta["lq"] = std::to_string(b.lq);
  c.meta["training_size"] = std::to_string(res.calibration.training_size);
  c.meta["e_hat"] = CsvWriter::num(res.e_hat);
  c.meta["converged"] = res.converged ? "true" : "false";
  return c;
}

GreedyResult unpack_greedy(const ArtifactContainer& c, const FullOrderModel& fom) {
  if (c.meta.count("kind") == 0 || c.meta.at("kind") != "greedy")
    throw ContainerError("container: not a greedy artifact");
  NestedBases b;
  b.y = c.get("basis_y");
  b.q = c.get("basis_q");
  try {
    b.ly = std::stoi(c.meta.at("ly"));
    b.lq = std::stoi(c.meta.at("lq"));
  } catch (const std::exception&) {
    throw ContainerError("container: bad basis dimensions");
  }
  const AssembledOperators& ops = fom.ops();
  if (b.y.rows() != ops.dim_y() || b.q.rows() != ops.dim_q() || b.ly < 1 || b.lq < 1 ||
      b.ly > b.my() || b.lq > b.mq())
    throw ContainerError("container: bases do not match the discretization");
  DeimInterpolant deim;
  deim.basis = c.get("deim_basis");
  const Matrix& pts = c.get("deim_points");
  if (deim.basis.rows() != ops.dim_q() || pts.rows() != deim.basis.cols() || pts.cols() != 1)
    throw ContainerError("container: DEIM data does not match the discretization");
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double p = pts(i, 0);
    if (p < 0 || p >= ops.dim_q() || p != static_cast<int>(p))
      throw ContainerError("container: invalid DEIM point");
    deim.points.push_back(static_cast<int>(p));
  }
  deim.sampled_basis.resize(deim.size(), deim.size());
  for (int i = 0; i < deim.size(); ++i) deim.sampled_basis.row(i) = deim.basis.row(deim.points[i]);

  GreedyResult r;
  r.model = fom.reduce(std::move(b), std::move(deim));
  r.f_compressed = c.get("f_compressed");
  const Matrix& sig = c.get("sigma");
  if (sig.size() != 2) throw ContainerError("container: bad calibration");
  r.calibration.sigma_y = sig(0);
  r.calibration.sigma_q = sig(1);
  r.calibration.training_size = std::stoi(c.meta.at("training_size"));
  r.e_hat = std::stod(c.meta.at("e_hat"));
  r.converged = c.meta.count("converged") && c.meta.at("converged") == "true";
  return r;
}

}  // namespace hrb
