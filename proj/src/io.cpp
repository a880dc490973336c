#include "fgw/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fgw/sinkhorn.hpp"

namespace fgw::io {
namespace {

std::uint64_t bswap64(std::uint64_t v) {
  v = ((v & 0x00ff00ff00ff00ffULL) << 8) | ((v >> 8) & 0x00ff00ff00ff00ffULL);
  v = ((v & 0x0000ffff0000ffffULL) << 16) | ((v >> 16) & 0x0000ffff0000ffffULL);
  return (v << 32) | (v >> 32);
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return bswap64(v);
  return v;
}

void put_u64(std::string& buf, std::uint64_t v) {
  const std::uint64_t le = to_le(v);
  char tmp[8];
  std::memcpy(tmp, &le, 8);
  buf.append(tmp, 8);
}

void put_f64(std::string& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

void put_f64_block(std::string& buf, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put_f64(buf, v[i]);
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  std::uint64_t u64() {
    if (pos + 8 > bytes.size()) throw IoError("truncated file");
    std::uint64_t v;
    std::memcpy(&v, bytes.data() + pos, 8);
    pos += 8;
    return to_le(v);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64_block(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f64();
  }
};

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("short write: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (!f && !f.eof()) throw IoError("read failed: " + path);
  return std::move(ss).str();
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw IoError("bad number: " + s);
  return v;
}

long long parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw IoError("bad integer: " + s);
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw IoError("bad integer: " + s);
  return v;
}

// key -> token list, preserving duplicate keys in order
struct Header {
  std::vector<std::pair<std::string, std::vector<std::string>>> lines;

  const std::vector<std::string>* find(const std::string& key) const {
    for (const auto& [k, v] : lines)
      if (k == key) return &v;
    return nullptr;
  }
  const std::vector<std::string>& need(const std::string& key) const {
    const auto* v = find(key);
    if (!v) throw IoError("missing header field: " + key);
    return *v;
  }
};

Header parse_header(const std::string& text) {
  Header h;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    std::string key = toks.front();
    toks.erase(toks.begin());
    h.lines.emplace_back(std::move(key), std::move(toks));
  }
  return h;
}

std::string scenario_line(const Scenario& s) {
  std::ostringstream ss;
  ss << "scenario " << scenario_kind_name(s.kind) << ' ' << s.n_points << ' '
     << s.seed << ' ' << s.feature_dim << ' ' << fmt_double(s.noise_sigma)
     << ' ' << fmt_double(s.overlap_fraction) << ' '
     << fmt_double(s.alias_fraction);
  return ss.str();
}

Scenario parse_scenario(const std::vector<std::string>& t) {
  if (t.size() != 7) throw IoError("malformed scenario header line");
  Scenario s;
  s.kind = scenario_kind_from_name(t[0]);
  s.n_points = static_cast<int>(parse_int(t[1]));
  s.seed = parse_u64(t[2]);
  s.feature_dim = static_cast<int>(parse_int(t[3]));
  s.noise_sigma = parse_double(t[4]);
  s.overlap_fraction = parse_double(t[5]);
  s.alias_fraction = parse_double(t[6]);
  return s;
}

}  // namespace

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_bundle(const std::string& path, const PairBundle& bundle) {
  const PairProblem& p = bundle.problem;
  p.validate();
  const std::size_t n = p.n(), m = p.m(), d = p.featA.dim();

  std::ostringstream h;
  h << "format_version 1\n";
  h << "n " << n << "\nm " << m << "\nd " << d << "\n";
  h << "flags";
  if (bundle.scenario) h << " scenario";
  if (bundle.gt) h << " gt";
  if (!bundle.scenario && !bundle.gt) h << " none";
  h << "\n";
  if (bundle.scenario) h << scenario_line(*bundle.scenario) << "\n";
  if (bundle.gt) {
    h << "gt_assigned " << bundle.gt->assigned_count() << "\n";
    for (std::size_t i = 0; i < bundle.gt->target_of_source.size(); ++i)
      if (bundle.gt->target_of_source[i] >= 0)
        h << "gt_pair " << i << ' ' << bundle.gt->target_of_source[i] << "\n";
    h << "gt_unmatched_targets";
    for (int j : bundle.gt->unmatched_targets) h << ' ' << j;
    h << "\n";
  }
  const std::string header = h.str();

  std::string out;
  put_u64(out, header.size());
  out += header;
  put_f64_block(out, p.featA.data().data(), n * d);
  put_f64_block(out, p.featB.data().data(), m * d);
  for (const Vec3& v : p.ptsA.pts) put_f64_block(out, v.data(), 3);
  for (const Vec3& v : p.ptsB.pts) put_f64_block(out, v.data(), 3);
  put_f64_block(out, p.massA.mass.data(), n);
  put_f64_block(out, p.massB.mass.data(), m);
  write_file(path, out);
}

PairBundle read_bundle(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r{bytes};
  const std::uint64_t hlen = r.u64();
  if (r.pos + hlen > bytes.size()) throw IoError("truncated header: " + path);
  const Header h = parse_header(bytes.substr(r.pos, hlen));
  r.pos += hlen;

  if (h.need("format_version").at(0) != "1")
    throw IoError("unsupported bundle format version");
  const std::size_t n = static_cast<std::size_t>(parse_int(h.need("n").at(0)));
  const std::size_t m = static_cast<std::size_t>(parse_int(h.need("m").at(0)));
  const std::size_t d = static_cast<std::size_t>(parse_int(h.need("d").at(0)));

  const std::size_t want = 8 * (n * d + m * d + 3 * n + 3 * m + n + m);
  if (bytes.size() - r.pos != want)
    throw IoError("bundle payload size mismatch: " + path);

  Mat fa(n, d), fb(m, d);
  r.f64_block(fa.data(), n * d);
  r.f64_block(fb.data(), m * d);
  PointSet3D pa, pb;
  pa.pts.resize(n);
  pb.pts.resize(m);
  for (Vec3& v : pa.pts) r.f64_block(v.data(), 3);
  for (Vec3& v : pb.pts) r.f64_block(v.data(), 3);
  DiscreteMeasure ma, mb;
  ma.mass.resize(n);
  mb.mass.resize(m);
  r.f64_block(ma.mass.data(), n);
  r.f64_block(mb.mass.data(), m);

  PairBundle out{PairProblem{FeatureMatrix(std::move(fa)),
                             FeatureMatrix(std::move(fb)), std::move(pa),
                             std::move(pb), std::move(ma), std::move(mb)},
                 std::nullopt, std::nullopt};
  out.problem.validate();

  if (const auto* sc = h.find("scenario")) out.scenario = parse_scenario(*sc);
  if (h.find("gt_assigned")) {
    GroundTruth gt;
    gt.target_of_source.assign(n, -1);
    for (const auto& [k, v] : h.lines)
      if (k == "gt_pair") {
        if (v.size() != 2) throw IoError("malformed gt_pair line");
        gt.target_of_source.at(static_cast<std::size_t>(parse_int(v[0]))) =
            static_cast<int>(parse_int(v[1]));
      } else if (k == "gt_unmatched_targets") {
        for (const auto& tok : v)
          gt.unmatched_targets.push_back(static_cast<int>(parse_int(tok)));
      }
    if (gt.assigned_count() !=
        static_cast<std::size_t>(parse_int(h.need("gt_assigned").at(0))))
      throw IoError("gt_assigned count mismatch");
    out.gt = std::move(gt);
  }
  return out;
}

void write_plan(const std::string& path, const TransportPlan& plan) {
  std::ostringstream h;
  h << "format_version 1\n";
  h << "n " << plan.rows() << "\nm " << plan.cols() << "\n";
  h << "solver " << plan.meta.solver << "\n";
  h << "stage " << plan.meta.iteration << "\n";
  h << "objective " << fmt_double(plan.meta.objective) << "\n";
  const std::string header = h.str();

  std::string out;
  put_u64(out, header.size());
  out += header;
  put_f64_block(out, plan.m.data(), plan.m.size());
  write_file(path, out);
}

TransportPlan read_plan(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r{bytes};
  const std::uint64_t hlen = r.u64();
  if (r.pos + hlen > bytes.size()) throw IoError("truncated header: " + path);
  const Header h = parse_header(bytes.substr(r.pos, hlen));
  r.pos += hlen;

  if (h.need("format_version").at(0) != "1")
    throw IoError("unsupported plan format version");
  const std::size_t n = static_cast<std::size_t>(parse_int(h.need("n").at(0)));
  const std::size_t m = static_cast<std::size_t>(parse_int(h.need("m").at(0)));
  if (bytes.size() - r.pos != 8 * n * m)
    throw IoError("plan payload size mismatch: " + path);

  TransportPlan plan;
  plan.m = Mat(n, m);
  r.f64_block(plan.m.data(), n * m);
  plan.meta.solver = h.need("solver").at(0);
  plan.meta.iteration = static_cast<int>(parse_int(h.need("stage").at(0)));
  plan.meta.objective = parse_double(h.need("objective").at(0));
  return plan;
}

void write_labels(const std::string& path, const PseudoLabels& labels,
                  int topk) {
  std::ostringstream out;
  out << "fgw_labels 1\n";
  out << "n " << labels.rows() << "\nm " << labels.cols() << "\n";
  out << "topk " << topk << "\n";
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    out << "label " << i << ' ' << (labels.kept_mask[i] ? 1 : 0);
    for (const auto& c : labels.candidates[i])
      out << ' ' << c.target << ':' << fmt_double(c.value);
    out << "\n";
  }
  write_file(path, out.str());
}

PseudoLabels read_labels(const std::string& path) {
  const std::string bytes = read_file(path);
  const Header h = parse_header(bytes);
  const auto* magic = h.find("fgw_labels");
  if (!magic || magic->at(0) != "1") throw IoError("not a labels file: " + path);
  const std::size_t n = static_cast<std::size_t>(parse_int(h.need("n").at(0)));
  const std::size_t m = static_cast<std::size_t>(parse_int(h.need("m").at(0)));

  PseudoLabels out;
  out.hard = Mat(n, m, 0.0);
  out.candidates.resize(n);
  out.kept_mask.assign(n, 0);
  for (const auto& [k, v] : h.lines) {
    if (k != "label") continue;
    if (v.size() < 2) throw IoError("malformed label line");
    const std::size_t i = static_cast<std::size_t>(parse_int(v[0]));
    if (i >= n) throw IoError("label row out of range");
    out.kept_mask.at(i) = static_cast<std::uint8_t>(parse_int(v[1]));
    for (std::size_t t = 2; t < v.size(); ++t) {
      const auto colon = v[t].find(':');
      if (colon == std::string::npos) throw IoError("malformed candidate");
      const std::size_t j =
          static_cast<std::size_t>(parse_int(v[t].substr(0, colon)));
      if (j >= m) throw IoError("label column out of range");
      const double val = parse_double(v[t].substr(colon + 1));
      out.candidates[i].push_back(
          PseudoLabels::Candidate{static_cast<int>(j), val});
      out.hard(i, j) = 1.0;
    }
  }
  return out;
}

void write_diagnostics(const std::string& path,
                       const std::vector<StageDiagnostics>& stages,
                       const std::vector<std::string>& warnings) {
  std::ostringstream out;
  out << "fgw_diag 1\n";
  for (const StageDiagnostics& d : stages) {
    out << "stage " << d.stage << " objective " << fmt_double(d.objective)
        << " iters " << d.solve.iterations_used << " potential_change "
        << fmt_double(d.solve.final_potential_change) << " row_err "
        << fmt_double(d.solve.row_marginal_err) << " col_err "
        << fmt_double(d.solve.col_marginal_err) << " mass "
        << fmt_double(d.solve.transported_mass) << " converged "
        << (d.solve.converged ? 1 : 0) << " anchors " << d.anchor_count
        << " mean_cycle_error " << fmt_double(d.anchor_mean_cycle_error)
        << " fallback " << (d.anchor_fallback ? 1 : 0) << " shortfall "
        << (d.anchor_shortfall ? 1 : 0) << "\n";
  }
  for (const std::string& w : warnings) out << "warn " << w << "\n";
  write_file(path, out.str());
}

}  // namespace fgw::io
