#pragma once
// On-disk formats. Binary payloads are little-endian 64-bit floats
// regardless of host so golden files compare equal across platforms.
//
// Bundle (.fgwb):  u64-LE header length | text header | payload blocks
//   featA (n*d), featB (m*d), ptsA (n*3), ptsB (m*3), massA (n), massB (m)
// Plan (.plan):    u64-LE header length | text header | n*m doubles
// Labels (.labels) and diagnostics (.diag) are line-oriented text.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgw/core.hpp"
#include "fgw/pipeline.hpp"
#include "fgw/synth.hpp"

namespace fgw::io {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct PairBundle {
  PairProblem problem;
  std::optional<Scenario> scenario;
  std::optional<GroundTruth> gt;
};

void write_bundle(const std::string& path, const PairBundle& bundle);
PairBundle read_bundle(const std::string& path);

void write_plan(const std::string& path, const TransportPlan& plan);
TransportPlan read_plan(const std::string& path);

void write_labels(const std::string& path, const PseudoLabels& labels,
                  int topk);
PseudoLabels read_labels(const std::string& path);

void write_diagnostics(const std::string& path,
                       const std::vector<StageDiagnostics>& stages,
                       const std::vector<std::string>& warnings);

// number formatting shared by all text output: %.17g round-trips exactly
std::string fmt_double(double v);

}  // namespace fgw::io
