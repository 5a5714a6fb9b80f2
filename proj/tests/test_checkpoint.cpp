#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "ctrkd/checkpoint.hpp"
#include "ctrkd/hash.hpp"
#include "ctrkd/model.hpp"
#include "ctrkd/optimizer.hpp"
#include "test_util.hpp"

using namespace ctrkd;
using testutil::TempDir;

namespace {

CtrModel sample_model() {
  ModelSpec spec;
  spec.fields = {{"item", 3}, {"hour", 2}};
  spec.hidden = {4, 2};
  Vocabulary v({"item", "hour"});
  for (const char* s : {"i0", "i1", "i2", "i3"}) v.insert(0, s);
  for (const char* s : {"h0", "h1", "h2"}) v.insert(1, s);
  CtrModel m = init_model(spec, v, 2024);
  m.meta.step = 17;
  m.meta.config_hash = 0x1122334455667788ull;
  m.meta.parent_hash = 0x99aabbccddeeff00ull;
  m.meta.label_mean = 0.0625;
  return m;
}

// Optimizer state with distinctive non-zero accumulators.
OptimizerState sample_opt(const CtrModel& m) {
  OptimizerState opt = make_optimizer_state(m);
  double x = 0.5;
  for (auto* blk : set_blocks(m, opt.acc)) {
    for (auto& v : *blk) {
      v = x;
      x += 0.25;
    }
  }
  return opt;
}

bool models_equal(const CtrModel& a, const CtrModel& b) {
  return parameter_digest(a) == parameter_digest(b) && a.meta.seed == b.meta.seed &&
         a.meta.step == b.meta.step && a.meta.config_hash == b.meta.config_hash &&
         a.meta.parent_hash == b.meta.parent_hash && a.meta.label_mean == b.meta.label_mean;
}

// Rewrites the format_version field and fixes up the trailing checksum so the
// only detectable problem is the version itself.
std::string with_version(std::string bytes, uint32_t version) {
  for (int i = 0; i < 4; ++i) bytes[8 + i] = static_cast<char>((version >> (8 * i)) & 0xff);
  const size_t body = bytes.size() - 8;
  const uint64_t sum = fnv1a64(bytes.data(), body);
  for (int i = 0; i < 8; ++i) bytes[body + i] = static_cast<char>((sum >> (8 * i)) & 0xff);
  return bytes;
}

}  // namespace

TEST_CASE("checkpoint round trip preserves every bit") {
  const CtrModel m = sample_model();
  const OptimizerState opt = sample_opt(m);

  const std::string bytes = serialize_checkpoint(m, &opt);
  LoadedCheckpoint back = deserialize_checkpoint(bytes);

  CHECK(models_equal(m, back.model));
  CHECK(back.model.vocab == m.vocab);
  CHECK(back.model.spec.hidden == m.spec.hidden);
  CHECK(back.model.tables[0].w == m.tables[0].w);
  CHECK(back.model.hidden[1].w == m.hidden[1].w);
  CHECK(back.model.output.act == Activation::Identity);

  REQUIRE(back.opt.has_value());
  CHECK(back.opt->epsilon == opt.epsilon);
  CHECK(back.opt->acc.tables == opt.acc.tables);
  CHECK(back.opt->acc.output.w == opt.acc.output.w);
  CHECK(back.opt->acc.output.b == opt.acc.output.b);

  // Canonical writer: serialize(load(bytes)) == bytes.
  CHECK(serialize_checkpoint(back.model, &*back.opt) == bytes);
}

TEST_CASE("checkpoint without optimizer state") {
  const CtrModel m = sample_model();
  const std::string bytes = serialize_checkpoint(m, nullptr);
  LoadedCheckpoint back = deserialize_checkpoint(bytes);
  CHECK(models_equal(m, back.model));
  CHECK_FALSE(back.opt.has_value());

  const OptimizerState opt = sample_opt(m);
  CHECK(bytes.size() < serialize_checkpoint(m, &opt).size());
}

TEST_CASE("checkpoint file round trip") {
  TempDir dir("ckpt");
  const CtrModel m = sample_model();
  const OptimizerState opt = sample_opt(m);
  const std::string path = dir.file("m.ckpt");
  save_checkpoint(m, &opt, path);

  LoadedCheckpoint back = load_checkpoint(path);
  CHECK(models_equal(m, back.model));

  const std::string path2 = dir.file("m2.ckpt");
  save_checkpoint(back.model, &*back.opt, path2);
  CHECK(testutil::read_bytes(path) == testutil::read_bytes(path2));
}

TEST_CASE("checkpoint error kinds") {
  const CtrModel m = sample_model();
  const std::string good = serialize_checkpoint(m, nullptr);

  auto kind_of = [](const std::string& bytes) {
    try {
      deserialize_checkpoint(bytes);
    } catch (const CheckpointError& e) {
      return e.kind;
    }
    throw std::runtime_error("expected CheckpointError");
  };

  SECTION("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    CHECK(kind_of(bad) == CheckpointError::Kind::BadMagic);
  }
  SECTION("truncation") {
    CHECK(kind_of(good.substr(0, 10)) == CheckpointError::Kind::Truncated);
  }
  SECTION("flipped payload byte fails the checksum") {
    std::string bad = good;
    bad[good.size() / 2] ^= 0x01;
    CHECK(kind_of(bad) == CheckpointError::Kind::Corrupt);
  }
  SECTION("flipped version byte also fails the checksum first") {
    std::string bad = good;
    bad[8] ^= 0x01;
    CHECK(kind_of(bad) == CheckpointError::Kind::Corrupt);
  }
  SECTION("unsupported version with a valid checksum") {
    const std::string bad = with_version(good, 2);
    CHECK(kind_of(bad) == CheckpointError::Kind::Version);
    CHECK_THROWS_WITH(deserialize_checkpoint(bad),
                      Catch::Matchers::ContainsSubstring("format_version 2"));
  }
  SECTION("current version round trips after the rewrite helper") {
    CHECK(with_version(good, kCheckpointVersion) == good);
  }
  SECTION("missing file") {
    try {
      load_checkpoint("/nonexistent/dir/x.ckpt");
      FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointError::Kind::Io);
    }
  }
}

TEST_CASE("parameter digest tracks weights and vocabulary only") {
  const CtrModel a = sample_model();
  CtrModel b = sample_model();
  CHECK(parameter_digest(a) == parameter_digest(b));

  b.meta.step = 999;  // metadata is not part of the digest
  b.meta.label_mean = 0.9;
  CHECK(parameter_digest(a) == parameter_digest(b));

  b.output.w[0] += 1e-12;
  CHECK(parameter_digest(a) != parameter_digest(b));

  CtrModel c = sample_model();
  c.vocab.insert(0, "i_new");
  c.tables[0].rows += 1;
  c.tables[0].w.resize(c.tables[0].rows * c.tables[0].dim, 0.0);
  CHECK(parameter_digest(a) != parameter_digest(c));
}
