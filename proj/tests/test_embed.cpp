#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <set>

#include <json.hpp>

#include "augpe/embed.hpp"
#include "augpe/kernels.hpp"
#include "augpe/mock_vocab.hpp"
#include "augpe/rng.hpp"
#include "test_http_server.hpp"

using namespace augpe;
using nlohmann::json;

namespace {

EmbedConfig mock_cfg(std::uint32_t dim = 16) {
  EmbedConfig cfg;
  cfg.kind = EmbedConfig::Kind::kMockHash;
  cfg.dimension = dim;
  return cfg;
}

EmbeddingMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                              bool normalize = false) {
  EmbeddingMatrix m(rows, cols);
  Rng rng(seed);
  for (auto& v : m.data()) v = rng.gaussian();
  if (normalize) m.l2_normalize_rows();
  return m;
}

}  // namespace

TEST_CASE("mock embedder: determinism, shape, normalization") {
  embed::MockHashEmbedder e(mock_cfg());
  const auto a = e.embed_batch({"x"});
  const auto b = e.embed_batch({"x"});
  CHECK(a.data() == b.data());  // bitwise identical

  const auto m = e.embed_batch({"one", "two words", "three word text"});
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 16);
  CHECK(m.normalized());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) ss += m.at(i, j) * m.at(i, j);
    CHECK(ss == doctest::Approx(1.0).epsilon(1e-9));
  }

  CHECK_THROWS_AS(e.embed_batch({}), DomainError);
}

TEST_CASE("mock embedder separates a 1k-word corpus with <0.1% collisions") {
  embed::MockHashEmbedder e(mock_cfg(32));
  const MockVocabulary vocab(1000, 3);
  std::vector<std::string> words(vocab.words().begin(), vocab.words().end());
  const auto m = e.embed_batch(words);

  std::size_t collisions = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.rows(); ++j) {
      if (kernels::squared_distance(m.row_span(i), m.row_span(j)) < 1e-18) ++collisions;
    }
  }
  const double rate = static_cast<double>(collisions) / (1000.0 * 999.0 / 2.0);
  CHECK(rate < 0.001);
  CHECK(kernels::squared_distance(e.embed_batch({"a", "b"}).row_span(0),
                                  e.embed_batch({"a", "b"}).row_span(1)) > 1e-12);
}

TEST_CASE("mock embedder groups same-cluster texts closer than cross-cluster") {
  EmbedConfig cfg = mock_cfg(32);
  cfg.mock_clusters = 3;
  embed::MockHashEmbedder e(cfg);
  const MockVocabulary vocab(600, 3);

  Rng rng(3);
  auto text_from = [&](std::uint32_t cluster, std::size_t words) {
    std::string t;
    const auto& pool = vocab.cluster_words(cluster);
    for (std::size_t w = 0; w < words; ++w) {
      if (w) t += ' ';
      t += pool[rng.uniform_int(pool.size())];
    }
    return t;
  };
  const auto m = e.embed_batch({text_from(0, 60), text_from(0, 60), text_from(1, 60)});
  const double same = kernels::squared_distance(m.row_span(0), m.row_span(1));
  const double cross = kernels::squared_distance(m.row_span(0), m.row_span(2));
  CHECK(same < cross);
}

TEST_CASE("mean_embedding: identity, idempotence, degenerate rows") {
  const auto base = random_matrix(4, 8, 21, true);

  const auto single = embed::mean_embedding({base}, base, true);
  for (std::size_t i = 0; i < base.data().size(); ++i)
    CHECK(single.data()[i] == doctest::Approx(base.data()[i]).epsilon(1e-12));

  const auto tripled = embed::mean_embedding({base, base, base}, base, true);
  for (std::size_t i = 0; i < base.data().size(); ++i)
    CHECK(tripled.data()[i] == doctest::Approx(base.data()[i]).epsilon(1e-12));

  EmbeddingMatrix neg = base;
  for (auto& v : neg.data()) v = -v;
  CHECK_THROWS_AS(embed::mean_embedding({base, neg}, base, true), DomainError);
  // without renormalization the zero rows pass through
  const auto raw = embed::mean_embedding({base, neg}, base, false);
  CHECK(raw.at(0, 0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(embed::mean_embedding({}, base, true), DomainError);
  CHECK_THROWS_AS(embed::mean_embedding({random_matrix(3, 8, 2)}, base, true), DomainError);
}

TEST_CASE("pairwise_nearest: spec examples") {
  const auto keys = random_matrix(6, 4, 31);
  const auto idx = embed::pairwise_nearest(keys, keys);
  for (std::size_t i = 0; i < keys.rows(); ++i) CHECK(idx[i] == i);  // self-nearest

  const auto one_key = keys.subset(std::vector<std::size_t>{2});
  for (std::size_t v : embed::pairwise_nearest(keys, one_key)) CHECK(v == 0);
}

TEST_CASE("pairwise_nearest equals the serial brute-force oracle") {
  const auto q = random_matrix(50, 8, 41);
  const auto k = random_matrix(20, 8, 42);
  CHECK(embed::pairwise_nearest(q, k) == kernels::nearest_key_serial(q, k));
}

TEST_CASE("pairwise_nearest: permutation equivariance and duplicate keys") {
  const auto q = random_matrix(30, 6, 51);
  const auto k = random_matrix(10, 6, 52);
  const auto base = embed::pairwise_nearest(q, k);

  std::vector<std::size_t> perm{7, 2, 9, 0, 4, 1, 8, 3, 6, 5};
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
  const auto permuted = embed::pairwise_nearest(q, k.subset(perm));
  for (std::size_t i = 0; i < q.rows(); ++i) CHECK(permuted[i] == inverse[base[i]]);

  // duplicating a key keeps the earlier index winning
  std::vector<std::size_t> dup{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 3};
  const auto dupped = embed::pairwise_nearest(q, k.subset(dup));
  for (std::size_t i = 0; i < q.rows(); ++i) CHECK(dupped[i] == base[i]);
}

TEST_CASE("on unit rows, squared-L2 and cosine nearest neighbors agree") {
  const auto q = random_matrix(40, 8, 61, true);
  const auto k = random_matrix(15, 8, 62, true);
  const auto by_l2 = embed::pairwise_nearest(q, k);
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double best_cos = -2.0;
    std::size_t best = 0;
    for (std::size_t j = 0; j < k.rows(); ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < 8; ++c) dot += q.at(i, c) * k.at(j, c);
      if (dot > best_cos) {
        best_cos = dot;
        best = j;
      }
    }
    CHECK(by_l2[i] == best);
  }
}

TEST_CASE("http embedding provider: wire format, reordering, retries") {
  augpe_test::TestServer server;
  int calls = 0;
  std::string captured_body;
  std::string captured_auth;
  server.post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    captured_body = req.body;
    captured_auth = req.get_header_value("Authorization");
    if (calls == 1) {  // first attempt fails; the client must retry
      res.status = 500;
      res.set_content("transient", "text/plain");
      return;
    }
    const json body = json::parse(req.body);
    const auto& inputs = body["input"];
    // answer out of order on purpose; the client re-sorts by "index"
    json data = json::array();
    for (std::size_t i = inputs.size(); i-- > 0;) {
      json item;
      item["index"] = i;
      json vec = json::array();
      for (int c = 0; c < 4; ++c) vec.push_back(static_cast<double>(i + 1) * (c + 1));
      item["embedding"] = vec;
      data.push_back(item);
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });

  setenv("AUGPE_API_KEY", "test-key-123", 1);
  EmbedConfig cfg;
  cfg.kind = EmbedConfig::Kind::kHttpApi;
  cfg.dimension = 4;
  cfg.normalize = false;
  cfg.endpoint = server.start();
  cfg.model = "embedder-x";
  cfg.backoff_base_s = 0.01;
  embed::HttpEmbeddingProvider provider(cfg);

  const auto m = provider.embed_batch({"alpha", "beta"});
  CHECK(calls == 2);
  CHECK(m.rows() == 2);
  CHECK(m.at(0, 0) == doctest::Approx(1.0));  // row 0 = index 0 despite reversed reply
  CHECK(m.at(1, 0) == doctest::Approx(2.0));
  CHECK(captured_auth == "Bearer test-key-123");
  CHECK(json::parse(captured_body) == json{{"input", {"alpha", "beta"}}, {"model", "embedder-x"}});
  unsetenv("AUGPE_API_KEY");
}

TEST_CASE("http embedding provider: dimension mismatch is a protocol error") {
  augpe_test::TestServer server;
  server.post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    json data = json::array();
    for (std::size_t i = 0; i < body["input"].size(); ++i)
      data.push_back({{"index", i}, {"embedding", {1.0, 2.0}}});  // wrong dimension
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });

  EmbedConfig cfg;
  cfg.kind = EmbedConfig::Kind::kHttpApi;
  cfg.dimension = 4;
  cfg.endpoint = server.start();
  embed::HttpEmbeddingProvider provider(cfg);
  CHECK_THROWS_AS(provider.embed_batch({"a"}), ProtocolError);
}

TEST_CASE("http embedding provider: exhausted retries carry the batch range") {
  augpe_test::TestServer server;
  server.post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });

  EmbedConfig cfg;
  cfg.kind = EmbedConfig::Kind::kHttpApi;
  cfg.dimension = 4;
  cfg.endpoint = server.start();
  cfg.max_retries = 2;
  cfg.backoff_base_s = 0.01;
  embed::HttpEmbeddingProvider provider(cfg);
  try {
    provider.embed_batch({"a", "b"});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(std::string(e.what()).find("failed indices 0..1") != std::string::npos);
  }
}
