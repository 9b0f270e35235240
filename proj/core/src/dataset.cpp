#include "vsa/dataset.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <string>

#include "vsa/error.hpp"

namespace vsa {
namespace {

static_assert(std::endian::native == std::endian::little, "VSAF I/O assumes little-endian");

constexpr char kMagic[4] = {'V', 'S', 'A', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw FormatError(FormatError::Code::kTruncated, "truncated header in " + path.string());
  }
  return v;
}

}  // namespace

QuadratureWeights uniform_weights(std::size_t S) {
  if (S < 1) throw ValidationError("S must be >= 1");
  return QuadratureWeights(S, 1.0 / static_cast<double>(S));
}

AnalysisWindow::AnalysisWindow(const FieldTrajectory& traj, std::size_t Q) : traj_(&traj), q_(Q) {
  if (Q < 1) throw ValidationError("Q must be ≥ 1");
  if (traj.samples() <= Q + 1) {
    throw ValidationError("insufficient samples: N = " + std::to_string(traj.samples()) +
                          " must exceed Q + 1 = " + std::to_string(Q + 1));
  }
}

AnalysisWindow trim_for_delays(const FieldTrajectory& traj, std::size_t Q) {
  return AnalysisWindow(traj, Q);
}

std::vector<double> product_weights(const AnalysisWindow& window, std::span<const double> w) {
  if (w.size() != window.points()) throw ValidationError("weight count does not match S");
  const std::size_t S = window.points();
  std::vector<double> out(window.size());
  const double inv = 1.0 / static_cast<double>(window.n_eff());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i % S] * inv;
  return out;
}

void write_dataset(const FieldTrajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, traj.samples());
  put<std::uint64_t>(out, traj.points());
  put<double>(out, traj.tau());
  put<double>(out, traj.length());
  auto v = traj.values();
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!out) throw FormatError(FormatError::Code::kIo, "write failed for " + path.string());
}

FieldTrajectory read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4)) {
    throw FormatError(FormatError::Code::kTruncated, "truncated header in " + path.string());
  }
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(FormatError::Code::kBadMagic, "bad magic in " + path.string());
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw FormatError(FormatError::Code::kVersionMismatch,
                      "unsupported VSAF version " + std::to_string(version));
  }
  const auto N = get<std::uint64_t>(in, path);
  const auto S = get<std::uint64_t>(in, path);
  const auto tau = get<double>(in, path);
  const auto L = get<double>(in, path);
  if (N == 0 || S == 0 || N > (std::uint64_t{1} << 40) / S) {
    throw FormatError(FormatError::Code::kCorrupt, "implausible dimensions in " + path.string());
  }
  std::vector<double> data(N * S);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != data.size() * sizeof(double)) {
    throw FormatError(FormatError::Code::kTruncated, "truncated payload in " + path.string());
  }
  try {
    return FieldTrajectory(N, S, tau, L, std::move(data));
  } catch (const ValidationError& e) {
    throw FormatError(FormatError::Code::kCorrupt, e.what());
  }
}

void export_csv(const FieldTrajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  out << std::setprecision(17) << "t,y,value\n";
  for (std::size_t n = 0; n < traj.samples(); ++n) {
    const double t = static_cast<double>(n) * traj.tau();
    for (std::size_t s = 0; s < traj.points(); ++s) {
      out << t << ',' << traj.grid_point(s) << ',' << traj(n, s) << '\n';
    }
  }
}

}  // namespace vsa
