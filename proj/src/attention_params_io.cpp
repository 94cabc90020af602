#include "star/attention.hpp"
#include "star/byte_io.hpp"

#include <fstream>
#include <vector>

namespace star {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'P', '1'};
constexpr std::uint8_t kRoleKey = 1;
constexpr std::uint8_t kRoleQuery = 2;

void put_block(std::ostream& out, std::uint8_t role, const SquareMatrix<double>& m) {
  le::put_uint<std::uint8_t>(out, role);
  le::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  le::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) le::put_f64(out, m(r, c));
}

template <std::size_t N>
void need(std::istream& in, std::array<unsigned char, N>& buf, const char* what) {
  if (le::read_exact(in, buf.data(), N) != N) throw Error(std::string("attention params: truncated ") + what);
}

}  // namespace

void save_attention_params(std::ostream& out, const AttentionParams<double>& params) {
  params.validate();
  out.write(kMagic, 4);
  le::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(params.dim()));
  le::put_uint<std::uint8_t>(out, params.scaled ? 1 : 0);
  le::put_f64(out, params.decay_alpha);
  put_block(out, kRoleKey, params.key_proj);
  put_block(out, kRoleQuery, params.query_proj);
  if (!out) throw Error("attention params: write failed");
}

AttentionParams<double> load_attention_params(std::istream& in) {
  std::array<unsigned char, 17> head{};
  need(in, head, "header");
  if (std::memcmp(head.data(), kMagic, 4) != 0) throw Error("attention params: bad magic");
  const auto dim = le::get_uint<std::uint32_t>(head.data() + 4);
  if (dim == 0) throw Error("attention params: zero dim");
  AttentionParams<double> p;
  p.scaled = head[8] != 0;
  p.decay_alpha = le::get_f64(head.data() + 9);

  bool have_key = false;
  bool have_query = false;
  for (int block = 0; block < 2; ++block) {
    std::array<unsigned char, 9> bh{};
    need(in, bh, "block header");
    const auto role = bh[0];
    const auto rows = le::get_uint<std::uint32_t>(bh.data() + 1);
    const auto cols = le::get_uint<std::uint32_t>(bh.data() + 5);
    if (rows != dim || cols != dim) throw Error("attention params: block shape differs from header dim");
    std::vector<unsigned char> raw(static_cast<std::size_t>(rows) * cols * 8);
    if (le::read_exact(in, raw.data(), raw.size()) != raw.size()) throw Error("attention params: truncated block");
    SquareMatrix<double> m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = le::get_f64(raw.data() + 8 * (r * cols + c));
    if (role == kRoleKey && !have_key) {
      p.key_proj = std::move(m);
      have_key = true;
    } else if (role == kRoleQuery && !have_query) {
      p.query_proj = std::move(m);
      have_query = true;
    } else {
      throw Error("attention params: unknown or repeated role tag " + std::to_string(role));
    }
  }
  p.validate();
  return p;
}

AttentionParams<double> load_attention_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open attention params file " + path);
  return load_attention_params(in);
}

}  // namespace star
