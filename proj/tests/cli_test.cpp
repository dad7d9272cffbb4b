#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "circsketch/circsketch.hpp"
#include "circsketch/oracle.hpp"

using namespace circsketch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(CIRCSKETCH_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  Outcome r{-1, {}};
  if (!p) return r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int rc = pclose(p);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  while (!r.out.empty() && r.out.back() == '\n') r.out.pop_back();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("circsketch-cli-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const Str& s) {
    const auto path = (dir_ / name).string();
    std::ofstream out(path, std::ios::binary);
    for (Symbol c : s.symbols()) out.put(static_cast<char>(c));
    return path;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  const std::string seed_ = Seed::from_u64(77).to_hex();
};

std::vector<std::uint8_t> slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_F(Cli, EncodeIsByteIdenticalAcrossInvocations) {
  oracle::Generator g(1);
  const auto in = write("s.bin", g.random_string(1024, 256));
  for (const char* mode : {"exact", "approx"}) {
    const std::string flags = std::string(" --mode ") + mode + " --k 8 --seed " + seed_;
    ASSERT_EQ(run("encode " + in + flags + " --out " + path("a.sk")).status, 0);
    ASSERT_EQ(run("encode " + in + flags + " --out " + path("b.sk")).status, 0);
    EXPECT_EQ(slurp(path("a.sk")), slurp(path("b.sk")));
    EXPECT_FALSE(slurp(path("a.sk")).empty());
  }
}

TEST_F(Cli, DistAndShiftOnPlantedPairs) {
  oracle::Generator g(2);
  const SchemeParams p = make_params(1024, 8, std::nullopt, Seed::from_hex(seed_));
  const auto inst = g.planted(p, 5, oracle::Regime::nonperiodic);
  const auto i1 = write("1.bin", inst.s1), i2 = write("2.bin", inst.s2);
  const std::string flags = " --mode exact --k 8 --seed " + seed_;
  ASSERT_EQ(run("encode " + i1 + flags + " --out " + path("1.sk")).status, 0);
  ASSERT_EQ(run("encode " + i2 + flags + " --out " + path("2.sk")).status, 0);
  const std::string pair = path("1.sk") + " " + path("2.sk") + " --seed " + seed_;
  const Outcome d = run("dist " + pair + " --shift " + std::to_string(inst.shift));
  EXPECT_EQ(d.status, 0);
  EXPECT_EQ(d.out, "5");
  const Outcome id = run("dist " + path("1.sk") + " " + path("1.sk") + " --seed " + seed_);
  EXPECT_EQ(id.out, "0");
  const Outcome far = run("dist " + pair + " --shift " + std::to_string((inst.shift + 1) % 1024));
  EXPECT_EQ(far.status, 3);
  EXPECT_EQ(far.out, "FAIL(>k)");
  const Outcome sh = run("shift " + pair);
  EXPECT_EQ(sh.status, 0);
  EXPECT_EQ(sh.out, "5");
}

TEST_F(Cli, ApproxShiftOfRotationIsZero) {
  oracle::Generator g(3);
  const Str s = g.random_string(512, 256);
  const auto i1 = write("1.bin", s), i2 = write("2.bin", rotate(s, 100));
  const std::string flags = " --mode approx --k 8 --eps 0.25 --seed " + seed_;
  ASSERT_EQ(run("encode " + i1 + flags + " --out " + path("1.sk")).status, 0);
  ASSERT_EQ(run("encode " + i2 + flags + " --out " + path("2.sk")).status, 0);
  const Outcome sh = run("shift " + path("1.sk") + " " + path("2.sk") + " --seed " + seed_);
  EXPECT_EQ(sh.status, 0);
  EXPECT_EQ(sh.out, "0");
  const Outcome far = run("dist " + path("1.sk") + " " + path("2.sk") + " --shift 3 --seed " + seed_);
  EXPECT_EQ(far.status, 3);
  EXPECT_EQ(far.out, "FAIL(>(1-eps)k)");
}

TEST_F(Cli, UsageErrors) {
  oracle::Generator g(4);
  const auto in = write("s.bin", g.random_string(256, 256));
  EXPECT_EQ(run("encode " + in + " --k 4 --out " + path("x.sk")).status, 2);  // missing seed
  EXPECT_EQ(run("encode " + in + " --k 4 --seed abc --out " + path("x.sk")).status, 2);
  EXPECT_EQ(run("encode " + in + " --mode fuzzy --k 4 --seed " + seed_ + " --out " + path("x.sk")).status, 2);
  EXPECT_EQ(run("encode " + in + " --k 0 --seed " + seed_ + " --out " + path("x.sk")).status, 2);
  EXPECT_EQ(run("nonsense").status, 2);
  // Incompatible headers.
  ASSERT_EQ(run("encode " + in + " --k 4 --seed " + seed_ + " --out " + path("a.sk")).status, 0);
  ASSERT_EQ(run("encode " + in + " --k 5 --seed " + seed_ + " --out " + path("b.sk")).status, 0);
  EXPECT_EQ(run("dist " + path("a.sk") + " " + path("b.sk") + " --seed " + seed_).status, 2);
  // Wrong seed.
  EXPECT_EQ(run("dist " + path("a.sk") + " " + path("a.sk") + " --seed " + Seed::from_u64(1).to_hex()).status, 2);
}

TEST_F(Cli, U32Alphabet) {
  {
    std::ofstream out(path("u.txt"));
    for (int i = 0; i < 300; ++i) out << (i * 7919) % 1000 << (i % 10 == 9 ? "\n" : " ");
  }
  EXPECT_EQ(run("encode " + path("u.txt") + " --alphabet u32 --k 4 --seed " + seed_ + " --out " + path("u.sk")).status, 2);
  EXPECT_EQ(run("encode " + path("u.txt") + " --alphabet u32 --sigma 1000 --k 4 --seed " + seed_ + " --out " +
                path("u.sk"))
                .status,
            0);
  EXPECT_EQ(run("dist " + path("u.sk") + " " + path("u.sk") + " --seed " + seed_).out, "0");
}

TEST_F(Cli, SelectAndBench) {
  oracle::Generator g(5);
  const auto in = write("s.bin", g.random_string(1024, 256));
  const Outcome s = run("select " + in + " --k 4 --seed " + seed_);
  EXPECT_EQ(s.status, 0);
  EXPECT_NE(s.out.find("\"noncubic\""), std::string::npos);
  {
    std::ofstream grid(path("grid.txt"));
    grid << "# n k eps\n256 2\n256 2 0.25\n";
  }
  const Outcome b = run("bench --grid " + path("grid.txt"));
  EXPECT_EQ(b.status, 0);
  EXPECT_EQ(b.out.substr(0, b.out.find('\n')), "n,k,eps,bytes,encode_ms,decode_ms");
  EXPECT_NE(b.out.find("\n256,2,0.25,"), std::string::npos);
}
