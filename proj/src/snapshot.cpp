#include "adamlab/snapshot.hpp"

#include "adamlab/errors.hpp"
#include "adamlab/io.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>

namespace adamlab {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'S', 'N'};

void put(std::string& buf, std::uint64_t x, int bytes) {
  for (int k = 0; k < bytes; ++k) buf.push_back(static_cast<char>((x >> (8 * k)) & 0xFF));
}

void put_f64(std::string& buf, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  put(buf, bits, 8);
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint64_t get(int bytes, const char* what) {
    need(static_cast<std::size_t>(bytes), what);
    std::uint64_t x = 0;
    for (int k = 0; k < bytes; ++k)
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    pos_ += static_cast<std::size_t>(bytes);
    return x;
  }
  double get_f64(const char* what) {
    const std::uint64_t bits = get(8, what);
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
  }
  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n)
      throw CorruptionError(CorruptionError::Reason::Truncated,
                            std::string("snapshot truncated while reading ") + what);
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint64_t byte_sum(std::string_view s) {
  std::uint64_t sum = 0;
  for (unsigned char c : s) sum += c;
  return sum;
}

std::string encode(const OptimizerSnapshot& snap) {
  snap.validate();
  const auto n = static_cast<std::uint64_t>(snap.size());
  std::string buf(kMagic, 4);
  put(buf, OptimizerSnapshot::kVersion, 4);
  put(buf, n, 8);
  put(buf, snap.partition.size(), 4);
  for (const auto& g : snap.partition.groups()) {
    put(buf, g.label.size(), 4);
    buf += g.label;
    put(buf, static_cast<std::uint64_t>(g.start), 8);
    put(buf, static_cast<std::uint64_t>(g.length), 8);
  }
  buf.reserve(buf.size() + 24 * n + 8);
  for (const auto* vec : {&snap.m, &snap.v, &snap.g})
    for (Eigen::Index i = 0; i < vec->size(); ++i) put_f64(buf, (*vec)[i]);
  put(buf, byte_sum(buf), 8);
  return buf;
}

OptimizerSnapshot decode(std::string_view data) {
  Reader rd(data);
  if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0)
    throw CorruptionError(CorruptionError::Reason::BadMagic, "not a snapshot file (bad magic)");
  rd.bytes(4, "magic");
  const auto version = rd.get(4, "version");
  if (version != OptimizerSnapshot::kVersion)
    throw CorruptionError(CorruptionError::Reason::UnsupportedVersion,
                          "unsupported snapshot version " + std::to_string(version));
  const auto n = rd.get(8, "length");
  const auto groups = rd.get(4, "group count");
  std::vector<Group> table;
  for (std::uint64_t k = 0; k < groups; ++k) {
    const auto len = rd.get(4, "group name length");
    Group g;
    g.label = std::string(rd.bytes(len, "group name"));
    g.start = static_cast<Eigen::Index>(rd.get(8, "group start"));
    g.length = static_cast<Eigen::Index>(rd.get(8, "group length"));
    table.push_back(std::move(g));
  }
  if (n > rd.remaining() / 24) rd.need(rd.remaining() + 1, "payload");
  OptimizerSnapshot snap;
  for (auto* vec : {&snap.m, &snap.v, &snap.g}) {
    vec->resize(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) (*vec)[static_cast<Eigen::Index>(i)] = rd.get_f64("payload");
  }
  const std::size_t payload_end = rd.pos();
  const auto stored = rd.get(8, "checksum");
  if (rd.remaining() != 0)
    throw CorruptionError(CorruptionError::Reason::Malformed, "trailing bytes after snapshot footer");
  if (stored != byte_sum(data.substr(0, payload_end)))
    throw CorruptionError(CorruptionError::Reason::ChecksumMismatch, "snapshot checksum mismatch");
  try {
    snap.partition = GroupPartition(std::move(table));
    snap.validate();
  } catch (const std::invalid_argument& e) {
    throw CorruptionError(CorruptionError::Reason::Malformed, std::string("bad group table: ") + e.what());
  }
  return snap;
}

}  // namespace

OptimizerSnapshot OptimizerSnapshot::capture(const AdamState<double>& state, const Eigen::VectorXd& g,
                                             const GroupPartition& partition) {
  OptimizerSnapshot s{partition, state.m, state.v, g};
  s.validate();
  return s;
}

void OptimizerSnapshot::validate() const {
  if (v.size() != m.size() || g.size() != m.size())
    throw std::invalid_argument("snapshot vectors differ in length");
  partition.validate(m.size(), false);
}

void write_snapshot(std::ostream& os, const OptimizerSnapshot& snap) {
  const std::string buf = encode(snap);
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("snapshot write failed");
}

OptimizerSnapshot read_snapshot(std::istream& is) {
  const std::string data{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  if (is.bad()) throw IoError("snapshot read failed");
  return decode(data);
}

void save_snapshot(const std::string& path, const OptimizerSnapshot& snap) { atomic_write(path, encode(snap)); }

OptimizerSnapshot load_snapshot(const std::string& path) { return decode(read_file(path)); }

std::vector<GroupAnalysis> analyze_snapshot(const OptimizerSnapshot& snap, const ModalityThresholds& th,
                                            const CounterRng& rng, double epsilon) {
  snap.validate();
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  const Eigen::VectorXd r = ratio(snap.m, snap.v);
  Eigen::VectorXd u(snap.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double d = std::sqrt(snap.v[i]) + epsilon;
    u[i] = d > 0.0 ? snap.m[i] / d : 0.0;
  }
  std::vector<GroupAnalysis> out;
  for (const auto& grp : snap.partition.groups()) {
    GroupAnalysis a;
    a.group = grp.label;
    a.size = grp.length;
    if (grp.length > 0) {
      const Eigen::VectorXd rg = segment(r, grp);
      a.ratio = summarize(rg);
      const Eigen::VectorXd ug = segment(u, grp);
      a.update = summarize(ug);
      if (grp.length >= 100) {
        a.ratio_modality = classify_modality(rg, th, rng.substream(2 * grp.start));
        a.update_modality = classify_modality(ug, th, rng.substream(2 * grp.start + 1));
      }
      a.grad_l2_norm = segment(snap.g, grp).norm();
      a.grad_inf_norm = segment(snap.g, grp).cwiseAbs().maxCoeff();
      a.m_l2_norm = segment(snap.m, grp).norm();
      a.m_inf_norm = segment(snap.m, grp).cwiseAbs().maxCoeff();
      a.v_l2_norm = segment(snap.v, grp).norm();
      a.v_inf_norm = segment(snap.v, grp).cwiseAbs().maxCoeff();
      a.sqrt_v_max = segment(snap.v, grp).cwiseSqrt().maxCoeff();
      a.vanishing = a.grad_inf_norm < epsilon;
      a.flagged = a.vanishing || (a.ratio_modality && a.ratio_modality->cls == Modality::Bimodal);
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace adamlab
