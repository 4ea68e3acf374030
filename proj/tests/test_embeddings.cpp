#include "doctest.h"

#include "anchorvec/embeddings.hpp"
#include "test_support.hpp"

using namespace anchorvec;

TEST_CASE("random init ranges and zero outputs") {
  const auto vocab = testing::numbered_vocab(50);
  const int dim = 16;
  const auto pair = init_random<float>(vocab, dim, 7);
  CHECK(pair.input.rows.rows() == 50);
  CHECK(pair.input.rows.cols() == dim);
  CHECK(pair.input.rows.cwiseAbs().maxCoeff() <= 0.5f / dim);
  CHECK(pair.input.rows.cwiseAbs().maxCoeff() > 0.0f);
  CHECK(pair.output.rows.isZero(0));
  CHECK(pair.input.role == Role::input);
  CHECK(pair.output.role == Role::output);

  const auto again = init_random<float>(vocab, dim, 7);
  CHECK(checksum(again.input.rows) == checksum(pair.input.rows));
  const auto other = init_random<float>(vocab, dim, 8);
  CHECK(checksum(other.input.rows) != checksum(pair.input.rows));
}

TEST_CASE("text format round trip is exact") {
  testing::TempDir dir;
  const auto vocab = testing::numbered_vocab(20);
  auto m = init_random<float>(vocab, 9, 3).input;
  m.rows(3, 4) = 1e-30f;
  m.rows(5, 0) = -123456.789f;
  save_text(m, dir / "m.vec");
  const auto back = load_text<float>(dir / "m.vec");
  CHECK(back.vocab->words() == vocab->words());
  CHECK(back.rows == m.rows);
  CHECK(checksum(back.rows) == checksum(m.rows));

  auto d = init_random<double>(vocab, 5, 4).input;
  save_text(d, dir / "d.vec");
  CHECK(load_text<double>(dir / "d.vec").rows == d.rows);
}

TEST_CASE("text format header") {
  testing::TempDir dir;
  EmbeddingMatrix<float> m;
  m.vocab = testing::numbered_vocab(2);
  m.rows.resize(2, 3);
  m.rows << 1, 2, 3, 4, 5, 6;
  save_text(m, dir / "m.vec");
  const std::string text = testing::read_file(dir / "m.vec");
  CHECK(text.rfind("2 3\n", 0) == 0);
  CHECK(text == "2 3\nw0 1 2 3\nw1 4 5 6\n");
}

TEST_CASE("saving an empty matrix is an error") {
  testing::TempDir dir;
  EmbeddingMatrix<float> m;
  m.vocab = testing::numbered_vocab(0);
  CHECK_THROWS(save_text(m, dir / "m.vec"));
}

TEST_CASE("loading malformed files fails") {
  testing::TempDir dir;
  CHECK_THROWS(load_text<float>(testing::write_file(dir / "a", "2 x\nw 1\n")));
  CHECK_THROWS(load_text<float>(testing::write_file(dir / "b", "2 2\nw 1 2\n")));
  CHECK_THROWS(load_text<float>(testing::write_file(dir / "c", "1 2\nw 1\n")));
  CHECK_THROWS(load_text<float>(testing::write_file(dir / "d", "1 2\nw 1 nan\n")));
  CHECK_THROWS(load_text<float>(dir / "missing"));
}

TEST_CASE("unit normalization") {
  EmbeddingMatrix<double> m;
  m.vocab = testing::numbered_vocab(2);
  m.rows.resize(2, 2);
  m.rows << 3, 4, 0, 2;
  const auto u = unit_normalize_copy(m);
  CHECK(u.rows(0, 0) == doctest::Approx(0.6));
  CHECK(u.rows(0, 1) == doctest::Approx(0.8));
  CHECK(u.rows(1, 1) == doctest::Approx(1.0));

  m.rows.row(1).setZero();
  try {
    unit_normalize_copy(m);
    FAIL("expected an error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("w1") != std::string::npos);
  }
}
