#include "hhesim/params_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hhesim/error.hpp"

namespace hhesim {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(std::string_view s, std::string_view key) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParameterError("bad integer for '" + std::string(key) + "': " +
                         std::string(s));
  return v;
}

std::vector<std::uint64_t> parse_list(std::string_view s, std::string_view key) {
  std::vector<std::uint64_t> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(parse_u64(tok, key));
  return out;
}

}  // namespace

CipherParams parse_params(std::string_view text) {
  std::optional<Scheme> scheme;
  std::optional<std::uint64_t> q, n, r, l, lambda, tail_cut;
  std::optional<double> sigma;
  std::vector<std::vector<std::uint64_t>> rows;
  std::vector<std::uint64_t> circ, ic;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto h = line.find('#'); h != std::string_view::npos)
      line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParameterError("line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "scheme") {
      if (val == "hera") scheme = Scheme::kHera;
      else if (val == "rubato") scheme = Scheme::kRubato;
      else throw ParameterError("unknown scheme: " + std::string(val));
    } else if (key == "q") q = parse_u64(val, key);
    else if (key == "n") n = parse_u64(val, key);
    else if (key == "r") r = parse_u64(val, key);
    else if (key == "l") l = parse_u64(val, key);
    else if (key == "lambda") lambda = parse_u64(val, key);
    else if (key == "tail_cut") tail_cut = parse_u64(val, key);
    else if (key == "sigma") {
      try {
        std::size_t used = 0;
        sigma = std::stod(std::string(val), &used);
        if (used != val.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParameterError("bad sigma: " + std::string(val));
      }
    } else if (key == "mix_row") rows.push_back(parse_list(val, key));
    else if (key == "mix_circulant") circ = parse_list(val, key);
    else if (key == "ic") ic = parse_list(val, key);
    else throw ParameterError("unknown key: " + std::string(key));
  }

  if (!scheme || !q || !n || !r)
    throw ParameterError("params need at least scheme, q, n and r");
  CipherParams p;
  p.scheme = *scheme;
  p.q = Modulus(*q);
  p.n = static_cast<unsigned>(*n);
  p.v = 0;
  while ((p.v + 1) * (p.v + 1) <= p.n) ++p.v;
  p.l = static_cast<unsigned>(l.value_or(*n));
  p.rounds = static_cast<unsigned>(*r);
  p.lambda = static_cast<unsigned>(lambda.value_or(128));
  p.sigma = sigma;
  if (!sigma && *scheme == Scheme::kRubato) p.sigma = 1.6;
  p.tail_cut = static_cast<unsigned>(tail_cut.value_or(16));

  if (!rows.empty() && !circ.empty())
    throw ParameterError("give either mix_row lines or mix_circulant");
  if (!rows.empty()) {
    std::vector<std::uint64_t> flat;
    for (const auto& row : rows) {
      if (row.size() != rows.size()) throw ParameterError("mixing matrix not square");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    p.mix = MixingMatrix(static_cast<unsigned>(rows.size()), std::move(flat));
  } else if (!circ.empty()) {
    p.mix = MixingMatrix::circulant(circ);
  } else {
    p.mix = MixingMatrix::standard(p.v);
  }

  if (ic.empty()) {
    ic.resize(p.n);
    for (unsigned i = 0; i < p.n; ++i) ic[i] = p.q.reduce(i + 1);
  }
  p.ic = std::move(ic);
  p.validate();
  return p;
}

CipherParams load_params(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open params file: " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_params(ss.str());
}

std::string format_params(const CipherParams& p) {
  std::ostringstream o;
  o << "scheme = " << to_string(p.scheme) << "\n"
    << "q = " << p.q.value() << "\n"
    << "n = " << p.n << "\n"
    << "r = " << p.rounds << "\n"
    << "l = " << p.l << "\n"
    << "lambda = " << p.lambda << "\n";
  if (p.sigma) o << "sigma = " << *p.sigma << "\ntail_cut = " << p.tail_cut << "\n";
  for (unsigned r = 0; r < p.mix.dim(); ++r) {
    o << "mix_row =";
    for (unsigned c = 0; c < p.mix.dim(); ++c) o << ' ' << p.mix.at(r, c);
    o << "\n";
  }
  o << "ic =";
  for (auto x : p.ic) o << ' ' << x;
  o << "\n";
  return o.str();
}

std::vector<std::uint8_t> parse_hex(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.size() % 2 != 0) throw ParameterError("hex string has odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto [p, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2,
                                   out[i], 16);
    if (ec != std::errc{} || p != hex.data() + 2 * i + 2)
      throw ParameterError("malformed hex string");
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 15]);
  }
  return s;
}

Key key_from_hex(const CipherParams& p, std::string_view hex) {
  const auto bytes = parse_hex(hex);
  const std::size_t width = (p.q.bits() + 7) / 8;
  Key key;
  key.k.reserve(p.n);
  if (bytes.size() == width * p.n) {
    for (unsigned i = 0; i < p.n; ++i) {
      std::uint64_t w = 0;
      for (std::size_t j = 0; j < width; ++j) w = (w << 8) | bytes[i * width + j];
      key.k.push_back(p.q.reduce(w));
    }
    return key;
  }
  if (bytes.empty() || bytes.size() > 15)
    throw ParameterError("key hex must be n words of " + std::to_string(width) +
                         " bytes or a 1..15 byte seed");
  XofStream src(bytes, 0x03);
  for (unsigned i = 0; i < p.n; ++i)
    key.k.push_back(rejection_sample_uniform(src, p.q, false).value());
  return key;
}

void write_keystream(std::ostream& os, std::span<const std::uint64_t> z,
                     const Modulus& q, KeystreamFormat fmt) {
  if (fmt == KeystreamFormat::kDecimal) {
    for (auto x : z) os << x << '\n';
    return;
  }
  const std::size_t width = (q.bits() + 7) / 8;
  for (auto x : z)
    for (std::size_t j = 0; j < width; ++j)
      os.put(static_cast<char>((x >> (8 * j)) & 0xff));
}

}  // namespace hhesim
