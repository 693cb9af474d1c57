#include "aucap/emb_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "aucap/error.hpp"

namespace aucap::emb {
namespace {

constexpr std::string_view kMagic = "AUCAP-EMB v1 ";

template <typename T>
void put_le(std::vector<char>& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(const char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

bool parse_field(std::string_view& rest, std::string_view key, Eigen::Index& out) {
  if (rest.substr(0, key.size()) != key) return false;
  rest.remove_prefix(key.size());
  long long v = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
  if (ec != std::errc{} || v < 0) return false;
  rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
  out = static_cast<Eigen::Index>(v);
  return true;
}

}  // namespace

Header parse_header(std::string_view line) {
  auto fail = [&] {
    return Error(Errc::malformed, "corrupt AUCAP-EMB header: '" + std::string(line) + "'");
  };
  if (line.substr(0, kMagic.size()) != kMagic) throw fail();
  std::string_view rest = line.substr(kMagic.size());
  Header h;
  if (!parse_field(rest, "dim=", h.dim)) throw fail();
  if (rest.substr(0, 1) != " ") throw fail();
  rest.remove_prefix(1);
  if (!parse_field(rest, "rows=", h.rows)) throw fail();
  if (rest == " dtype=f64") {
    h.precision = Precision::f64;
  } else if (!rest.empty()) {
    throw fail();
  }
  return h;
}

void write(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& values,
           Precision precision) {
  std::string header = std::string(kMagic) + "dim=" + std::to_string(values.cols()) +
                       " rows=" + std::to_string(values.rows());
  if (precision == Precision::f64) header += " dtype=f64";
  header += '\n';
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<char> buf;
  buf.reserve(static_cast<std::size_t>(values.size()) *
              (precision == Precision::f64 ? 8 : 4));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (precision == Precision::f64) {
        put_le<double>(buf, values(r, c));
      } else {
        put_le<float>(buf, static_cast<float>(values(r, c)));
      }
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(Errc::io_failure, "failed writing AUCAP-EMB block");
}

Eigen::MatrixXd read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::malformed, "corrupt AUCAP-EMB header: missing header line");
  }
  const Header h = parse_header(line);
  const std::size_t width = h.precision == Precision::f64 ? 8 : 4;
  const auto count = static_cast<std::size_t>(h.rows) * static_cast<std::size_t>(h.dim);
  std::vector<char> buf(count * width);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw Error(Errc::malformed, "AUCAP-EMB payload truncated: expected " +
                                     std::to_string(buf.size()) + " bytes");
  }
  Eigen::MatrixXd m(h.rows, h.dim);
  const char* p = buf.data();
  for (Eigen::Index r = 0; r < h.rows; ++r) {
    for (Eigen::Index c = 0; c < h.dim; ++c, p += width) {
      const double v = h.precision == Precision::f64 ? get_le<double>(p)
                                                     : static_cast<double>(get_le<float>(p));
      if (!std::isfinite(v)) {
        throw Error(Errc::invalid_argument, "AUCAP-EMB payload holds a non-finite value at row " +
                                                std::to_string(r));
      }
      m(r, c) = v;
    }
  }
  return m;
}

void save(const std::filesystem::path& path,
          const Eigen::Ref<const Eigen::MatrixXd>& values, Precision precision) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  write(out, values, precision);
}

Eigen::MatrixXd load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "embedding file not found: " + path.string());
  Eigen::MatrixXd m = read(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(Errc::malformed, "trailing bytes after AUCAP-EMB payload in " + path.string());
  }
  return m;
}

Eigen::MatrixXd load(const std::filesystem::path& path, Eigen::Index expected_dim) {
  Eigen::MatrixXd m = load(path);
  if (m.cols() != expected_dim) {
    throw Error(Errc::dimension_mismatch,
                path.string() + ": file dim=" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(expected_dim));
  }
  return m;
}

}  // namespace aucap::emb
