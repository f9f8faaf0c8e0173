#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hhesim/error.hpp"
#include "hhesim/params_io.hpp"

using namespace hhesim;

namespace {

const char* kRubato = R"(# rubato, long keystream
scheme = rubato
q = 22806529
n = 64
r = 2
l = 60
lambda = 128
sigma = 1.6
mix_circulant = 3 1 4 1 2 1 1 1
)";

bool same(const CipherParams& a, const CipherParams& b) {
  return a.scheme == b.scheme && a.q.value() == b.q.value() && a.n == b.n && a.v == b.v &&
         a.l == b.l && a.rounds == b.rounds && a.lambda == b.lambda && a.sigma == b.sigma &&
         a.tail_cut == b.tail_cut && a.mix.entries() == b.mix.entries() && a.ic == b.ic;
}

}  // namespace

TEST(ParseParams, MatchesBuiltins) {
  EXPECT_TRUE(same(parse_params(kRubato), rubato_par128l()));
  const char* hera =
      "scheme = hera\nq = 167772161\nn = 16\nr = 5\n"
      "mix_row = 2 3 1 1\nmix_row = 1 2 3 1\nmix_row = 1 1 2 3\nmix_row = 3 1 1 2\n";
  EXPECT_TRUE(same(parse_params(hera), hera_par128a()));
}

TEST(ParseParams, RoundTrip) {
  for (const auto& p : {hera_par128a(), rubato_par128l(), rubato_params(36, 3, 32, 22806529)})
    EXPECT_TRUE(same(parse_params(format_params(p)), p));
}

TEST(ParseParams, Errors) {
  EXPECT_THROW(parse_params("scheme = aes\nq=17\nn=16\nr=1\n"), ParameterError);
  EXPECT_THROW(parse_params("scheme = hera\nq=17\nn=16\n"), ParameterError);
  EXPECT_THROW(parse_params("scheme = hera\nq=1x7\nn=16\nr=5\n"), ParameterError);
  EXPECT_THROW(parse_params("scheme = hera\nq=17\nn=16\nr=5\ncolour = 3\n"), ParameterError);
  EXPECT_THROW(parse_params("scheme = hera\nq 17\n"), ParameterError);
  EXPECT_THROW(parse_params("scheme = hera\nq=15\nn=16\nr=5\n"), ParameterError);
  EXPECT_THROW(parse_params("scheme = hera\nq=17\nn=16\nr=5\nmix_row = 1 2\nmix_row = 1\n"),
               ParameterError);
  EXPECT_THROW(parse_params("scheme = rubato\nq=17\nn=16\nr=2\nl=12\nsigma = 1.6x\n"),
               ParameterError);
}

TEST(LoadParams, MissingFileIsIoError) {
  EXPECT_THROW(load_params("/nonexistent/dir/x.params"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "hhesim_test.params";
  {
    std::ofstream f(path);
    f << kRubato;
  }
  EXPECT_TRUE(same(load_params(path), rubato_par128l()));
  std::filesystem::remove(path);
}

TEST(Hex, ParseAndFormat) {
  EXPECT_EQ(parse_hex("0x00ff10"), (std::vector<std::uint8_t>{0x00, 0xff, 0x10}));
  EXPECT_EQ(parse_hex("ABcd"), (std::vector<std::uint8_t>{0xab, 0xcd}));
  EXPECT_TRUE(parse_hex("").empty());
  EXPECT_THROW(parse_hex("abc"), ParameterError);
  EXPECT_THROW(parse_hex("zz"), ParameterError);
  EXPECT_THROW(parse_hex("+1"), ParameterError);
  const std::vector<std::uint8_t> b{1, 2, 0xfe};
  EXPECT_EQ(to_hex(b), "0102fe");
  EXPECT_EQ(parse_hex(to_hex(b)), b);
}

TEST(KeyFromHex, FullWords) {
  const auto p = hera_par128a();  // 28-bit q, 4-byte words
  std::string hex;
  for (int i = 0; i < 16; ++i) hex += "0000000" + std::string(1, "0123456789abcdef"[i]);
  const auto k = key_from_hex(p, hex);
  for (unsigned i = 0; i < 16; ++i) EXPECT_EQ(k.k[i], i);
  // Words >= q are reduced.
  std::string big;
  for (int i = 0; i < 16; ++i) big += "0a000002";  // q + 1
  for (auto x : key_from_hex(p, big).k) EXPECT_EQ(x, 1u);
}

TEST(KeyFromHex, SeedExpansion) {
  const auto p = rubato_par128l();
  const auto a = key_from_hex(p, "0011223344");
  EXPECT_EQ(a.k.size(), 64u);
  for (auto x : a.k) EXPECT_LT(x, p.q.value());
  EXPECT_EQ(a.k, key_from_hex(p, "0011223344").k);
  EXPECT_NE(a.k, key_from_hex(p, "0011223345").k);
  EXPECT_THROW(key_from_hex(p, ""), ParameterError);
  EXPECT_THROW(key_from_hex(p, std::string(32, 'a')), ParameterError);
}

TEST(WriteKeystream, Formats) {
  const Modulus q(167772161);
  const std::vector<std::uint64_t> z{1, 0x09abcdef};
  std::ostringstream dec;
  write_keystream(dec, z, q, KeystreamFormat::kDecimal);
  EXPECT_EQ(dec.str(), "1\n162254319\n");
  std::ostringstream bin;
  write_keystream(bin, z, q, KeystreamFormat::kBinary);
  EXPECT_EQ(bin.str(), std::string("\x01\x00\x00\x00\xef\xcd\xab\x09", 8));
  std::ostringstream bin25;
  write_keystream(bin25, std::vector<std::uint64_t>{0x123456}, Modulus(22806529),
                  KeystreamFormat::kBinary);
  EXPECT_EQ(bin25.str(), std::string("\x56\x34\x12\x00", 4));
}

TEST(LoadParams, ShippedFilesMatchBuiltins) {
  const std::filesystem::path dir(SHIPPED_PARAMS_DIR);
  EXPECT_TRUE(same(load_params(dir / "hera.params"), hera_par128a()));
  EXPECT_TRUE(same(load_params(dir / "rubato.params"), rubato_par128l()));
}
