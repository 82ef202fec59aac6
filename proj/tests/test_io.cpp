#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "scenarios.hpp"
#include "sae/errors.hpp"
#include "sae/io.hpp"

using namespace sae;
using namespace sae::testing;

namespace {

long parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("hex encoding puts bit 0 in the top of the first digit") {
  CHECK(hex_encode(BitVector(8, {0}).view()) == "80");
  CHECK(hex_encode(BitVector(8, {3, 4}).view()) == "18");
  CHECK(hex_encode(BitVector(6, {5}).view()) == "04");
}

TEST_CASE("fingerprint file round trip") {
  const auto fps = synthesize(egfr_like_config(40, 3));
  std::stringstream buf;
  write_fingerprints(buf, fps);
  const auto back = read_fingerprints(buf);
  REQUIRE(back.size() == fps.size());
  CHECK(back.n_bits() == fps.n_bits());
  for (std::size_t i = 0; i < fps.size(); ++i) {
    CHECK(back.id(i) == fps.id(i));
    CHECK(hex_encode(back.row(i)) == hex_encode(fps.row(i)));
  }
}

TEST_CASE("fingerprint parse errors carry line numbers") {
  auto parse = [](const std::string& text) {
    return [text] {
      std::istringstream in(text);
      read_fingerprints(in);
    };
  };
  CHECK(parse_error_line(parse("n_bits 8\na\t80\nb\t8\n")) == 3);
  CHECK(parse_error_line(parse("n_bits 8\na\t8g\n")) == 2);
  CHECK(parse_error_line(parse("n_bits 6\na\t81\n")) == 2);
  CHECK(parse_error_line(parse("n_bits 8\na\t80\n\na\t40\n")) == 4);
  CHECK(parse_error_line(parse("bits 8\n")) == 1);
}

TEST_CASE("matrix file round trip") {
  const auto dense = egfr_like_matrix(30, 2);
  for (const SimilarityMatrix* m : {&dense}) {
    std::stringstream buf;
    write_matrix(buf, *m);
    const auto back = read_matrix(buf);
    CHECK_FALSE(back.is_sparse());
    for (std::size_t i = 0; i < 30; ++i)
      for (std::size_t j = 0; j < 30; ++j) CHECK(back.at(i, j) == m->at(i, j));
  }
  const auto sparse = dense.thresholded(0.3);
  std::stringstream buf;
  write_matrix(buf, sparse);
  const auto back = read_matrix(buf);
  CHECK(back.is_sparse());
  CHECK(*back.tau() == 0.3);
  CHECK(back.nonzero_pairs() == sparse.nonzero_pairs());
}

TEST_CASE("matrix parse errors") {
  auto parse = [](const std::string& text) {
    return [text] {
      std::istringstream in(text);
      read_matrix(in);
    };
  };
  CHECK(parse_error_line(parse("n 3\n0 1 0.5\n1 0 0.5\n")) == 3);
  CHECK(parse_error_line(parse("n 3\n0 3 0.5\n")) == 2);
  CHECK(parse_error_line(parse("n 3\n0 1 1.5\n")) == 2);
  CHECK(parse_error_line(parse("n 3 tau 0.4\n0 1 0.3\n")) == 2);
  CHECK(parse_error_line(parse("n 3\n0 1 0.5\n0 1 0.6\n")) == 3);
  CHECK(parse_error_line(parse("0 1 0.5\n")) == 1);
}

TEST_CASE("distribution request file") {
  const auto dir = std::filesystem::temp_directory_path() / "sae_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ext.txt") << "# external\n0.1\n0.5\n\n0.5\n0.9\n";
  }
  std::istringstream in("kind=mimic\nalpha=0.2\n# comment\nexternal=ext.txt\n");
  const auto req = read_distribution_request(in, dir);
  CHECK(req.kind == DistributionKind::kMimic);
  CHECK(req.external == std::vector<double>{0.1, 0.5, 0.5, 0.9});
  CHECK(req.materialize(200).expected == std::vector<double>{10, 20, 10});

  std::istringstream bounded("kind=bounded\nalpha=0.3\nboundaries=0,0.4,1\nmax_sim=0.4\n");
  CHECK(read_distribution_request(bounded).materialize(300).expected == std::vector<double>{90, 0});

  std::istringstream no_kind("alpha=0.3\n");
  CHECK_THROWS_AS(read_distribution_request(no_kind).materialize(10), SpecError);
  std::istringstream bad_key("kind=balanced\nalpha=0.3\ncolour=red\n");
  CHECK(parse_error_line([&] { read_distribution_request(bad_key); }) == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("split file round trip") {
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  const Split split{{1, 3}, {0, 2}};
  const std::vector<double> w{0.0, 0.999999, 0.25, 1.0};
  const auto file = make_split_file(ids, split, w, 0.5, 1.25, 0.0);
  std::stringstream buf;
  write_split(buf, file);
  CHECK(buf.str().rfind("# sae-split v1 alpha=0.5 loss=1.25 gap=0\n", 0) == 0);
  CHECK(buf.str().find("b\ttest\t0.999999\n") != std::string::npos);
  const auto back = read_split(buf);
  CHECK(back.ids == ids);
  CHECK(back.split().test == split.test);
  CHECK(back.split().train == split.train);
  CHECK(back.alpha == 0.5);

  std::istringstream dup("# sae-split v1 alpha=0.5 loss=0 gap=0\na\ttest\t1\na\ttrain\t0\n");
  CHECK(parse_error_line([&] { read_split(dup); }) == 3);
}

TEST_CASE("predictions file") {
  std::istringstream in("x\t1.5\t2\ny\t3\t3.25\n");
  const auto p = read_predictions(in);
  CHECK(p.at("x").truth == 1.5);
  CHECK(p.at("y").predicted == 3.25);
  std::istringstream bad("x\t1.5\n");
  CHECK(parse_error_line([&] { read_predictions(bad); }) == 1);
}
