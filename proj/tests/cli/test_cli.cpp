#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(TABLEHUB_TEST_DIR) / "data";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = tablehub::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("tablehub_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

const std::string kSales4 = "region,product,sales\nN,p,1\nN,q,2\nS,p,3\nS,q,4\n";

}  // namespace

TEST(CliGolden, Wrangle) {
  auto r = cli({"wrangle", (kData / "sales_1000.csv").string(), "--script", (kData / "sample.dwj").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kData / "golden" / "wrangle.csv"));
}

TEST(CliGolden, Pivots) {
  auto sample = (kData / "sales_1000.csv").string();
  struct Case {
    std::vector<std::string> args;
    std::string golden;
  };
  for (const auto& c : std::vector<Case>{
           {{"--rows", "region", "--cols", "product", "--agg", "sum:units", "--totals"}, "pivot_region_product_units.csv"},
           {{"--rows", "region,product"}, "pivot_region_product_count.csv"},
           {{"--rows", "discount", "--cols", "region", "--agg", "max:price"}, "pivot_discount_region_maxprice.csv"}}) {
    std::vector<std::string> args{"pivot", sample};
    args.insert(args.end(), c.args.begin(), c.args.end());
    auto r = cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, slurp(kData / "golden" / c.golden)) << c.golden;
  }
}

TEST(CliGolden, SmallPivotExample) {
  TempDir dir;
  auto in = dir.file("sales.csv", kSales4);
  auto r = cli({"pivot", in.string(), "--rows", "region", "--cols", "product", "--agg", "sum:sales", "--totals"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "region,p,q,total\nN,1,2,3\nS,3,4,7\n(total),4,6,10\n");
}

TEST(Cli, Info) {
  TempDir dir;
  auto in = dir.file("sales.csv", kSales4 + "S,,\n");
  auto r = cli({"info", in.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "name: sales\nrows: 5\ncolumns: 3\n  region\ttext\tnulls=0\n  product\ttext\tnulls=1\n  sales\tint\tnulls=1\n");
}

TEST(Cli, ConvertFormatsAndOutputFile) {
  TempDir dir;
  auto in = dir.file("sales.csv", kSales4);
  auto r = cli({"convert", in.string(), "--to", "matrix"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "[[\"region\",\"product\",\"sales\"],[\"N\",\"p\",1],[\"N\",\"q\",2],[\"S\",\"p\",3],[\"S\",\"q\",4]]\n");
  auto out = dir / "x.json";
  r = cli({"convert", in.string(), "--to", "column_map", "-o", out.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "");
  EXPECT_EQ(slurp(out), "{\"region\":[\"N\",\"N\",\"S\",\"S\"],\"product\":[\"p\",\"q\",\"p\",\"q\"],\"sales\":[1,2,3,4]}\n");
}

TEST(Cli, InputOptions) {
  TempDir dir;
  auto tsv = dir.file("t.tsv", "a\tb\n1\tx\n");
  EXPECT_EQ(cli({"convert", tsv.string(), "--to", "csv"}).out, "a,b\n1,x\n");
  auto semi = dir.file("t.txt", "1;2\n3;4\n");
  EXPECT_EQ(cli({"convert", semi.string(), "--to", "csv", "--no-header", "--delimiter", ";"}).out,
            "col_1,col_2\n1,2\n3,4\n");
  auto json = dir.file("t.data", "[{\"a\":1}]");
  EXPECT_EQ(cli({"convert", json.string(), "--format", "json", "--to", "csv"}).out, "a\n1\n");
}

// Property: csv -> column_map -> csv preserves every value, through real files.
TEST(Cli, ConvertRoundTrip) {
  TempDir dir;
  auto sample = (kData / "sales_1000.csv").string();
  auto json = dir / "s.json";
  ASSERT_EQ(cli({"convert", sample, "--to", "row_records", "-o", json.string()}).code, 0);
  auto back = cli({"convert", json.string(), "--to", "csv"});
  ASSERT_EQ(back.code, 0) << back.err;
  EXPECT_EQ(back.out, cli({"convert", sample, "--to", "csv"}).out);
}

TEST(CliExit, Usage) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"convert", "x.csv"}).code, 1);
  EXPECT_EQ(cli({"convert", "x.csv", "--to", "xml"}).code, 1);
  EXPECT_EQ(cli({"pivot", "x.csv", "--agg", "median:x"}).code, 1);
  EXPECT_EQ(cli({"pivot", "x.csv", "--agg", "sum"}).code, 1);
  EXPECT_EQ(cli({"info", "x.csv", "--delimiter", "ab"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(CliExit, IngestAndScriptErrors) {
  TempDir dir;
  auto ragged = dir.file("r.csv", "a,b\n1,2\n3,4,5\n");
  auto r = cli({"info", ragged.string(), "--delimiter", ","});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("RaggedRow"), std::string::npos) << r.err;
  auto in = dir.file("in.csv", kSales4);
  auto bad_script = dir.file("s.dwj", R"({"version":2,"steps":[]})");
  EXPECT_EQ(cli({"wrangle", in.string(), "--script", bad_script.string()}).code, 2);
  auto bad_project = dir.file("p.dsproj", "{}");
  EXPECT_EQ(cli({"serve", "--port", "0", "--project", bad_project.string()}).code, 2);
}

TEST(CliExit, ValidationErrors) {
  TempDir dir;
  auto in = dir.file("in.csv", kSales4);
  auto script = dir.file("s.dwj", R"({"version":1,"steps":[{"op":"select","names":["z"]}]})");
  auto r = cli({"wrangle", in.string(), "--script", script.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("UnknownColumn"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"pivot", in.string(), "--rows", "nope"}).code, 3);
  EXPECT_EQ(cli({"pivot", in.string(), "--rows", "region", "--agg", "sum:region"}).code, 3);
}

TEST(CliExit, IoErrors) {
  TempDir dir;
  EXPECT_EQ(cli({"info", (dir / "missing.csv").string()}).code, 4);
  auto in = dir.file("in.csv", kSales4);
  EXPECT_EQ(cli({"convert", in.string(), "--to", "csv", "-o", (dir / "no" / "such" / "dir.csv").string()}).code, 4);
  auto script = dir / "missing.dwj";
  EXPECT_EQ(cli({"wrangle", in.string(), "--script", script.string()}).code, 4);
  EXPECT_EQ(cli({"serve", "--host", "256.1.1.1", "--port", "0"}).code, 4);
}

TEST(Cli, LogLevelFromEnvironment) {
  TempDir dir;
  auto in = dir.file("in.csv", kSales4);
  ::setenv("TABLEHUB_LOG", "info", 1);
  auto r = cli({"info", in.string()});
  ::unsetenv("TABLEHUB_LOG");
  EXPECT_NE(r.err.find("info: loaded"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"info", in.string()}).err, "");
}
