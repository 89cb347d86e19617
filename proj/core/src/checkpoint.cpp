#include "hwb/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "hwb/error.hpp"

namespace hwb {

namespace {

constexpr std::size_t kHeader = 16 + 4 + 8 + 8;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_le(p, 8)); }

}  // namespace

void checkpoint_save(const SimulationState& s, const std::filesystem::path& path) {
  const auto& g = s.u.grid();
  require(g.size() <= 0xffffffffu, "checkpoint: grid too large for the format");
  std::vector<unsigned char> buf(kCheckpointMagic.begin(), kCheckpointMagic.end());
  buf.reserve(kHeader + 16 * g.size());
  put_u32(buf, static_cast<std::uint32_t>(g.size()));
  put_f64(buf, g.length());
  put_f64(buf, s.t);
  for (cplx z : s.u.values()) {
    put_f64(buf, z.real());
    put_f64(buf, z.imag());
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("checkpoint: cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    f.flush();
    if (!f) throw ValidationError("checkpoint: write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ValidationError("checkpoint: cannot move into place: " + ec.message());
  }
}

SimulationState checkpoint_load(const std::filesystem::path& path, const std::optional<Grid1D>& target) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("checkpoint: cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < kHeader) throw ValidationError("checkpoint: truncated header in " + path.string());
  if (!std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), buf.begin())) {
    throw ValidationError("checkpoint: bad magic in " + path.string());
  }
  const auto n = static_cast<std::size_t>(get_le(buf.data() + 16, 4));
  const double length = get_f64(buf.data() + 20);
  const double t = get_f64(buf.data() + 28);
  if (buf.size() != kHeader + 16 * n) {
    throw ValidationError("checkpoint: expected " + std::to_string(kHeader + 16 * n) + " bytes, found " +
                          std::to_string(buf.size()) + " in " + path.string());
  }
  if (target && (target->size() != n || target->length() != length)) {
    throw ValidationError("checkpoint: grid (" + std::to_string(n) + ", " + std::to_string(length) +
                          ") does not match the target grid (" + std::to_string(target->size()) + ", " +
                          std::to_string(target->length()) + ")");
  }
  Grid1D grid(n, length);
  CVec values(n);
  const unsigned char* p = buf.data() + kHeader;
  for (std::size_t j = 0; j < n; ++j, p += 16) values[j] = cplx(get_f64(p), get_f64(p + 8));
  return SimulationState{t, SpectralField(grid, std::move(values)), 0.0, 0};
}

}  // namespace hwb
