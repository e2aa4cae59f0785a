#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "eids/dataset.hpp"
#include "fixtures.hpp"

using namespace eids;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "eids_data_tests";
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& body) {
  fs::path p = temp_dir() / name;
  std::ofstream out(p, std::ios::trunc);
  out << body;
  return p;
}

data::RawRecord make_record(std::initializer_list<std::pair<std::size_t, const char*>> overrides,
                            const char* attack_cat = "Normal", const char* label = "0") {
  data::RawRecord rec;
  rec.values.assign(data::kRecordCells, "0");
  rec.values[1] = "tcp";
  rec.values[2] = "-";
  rec.values[3] = "FIN";
  for (const auto& [col, value] : overrides) rec.values[col] = value;
  rec.values[data::kFeatureCount] = attack_cat;
  rec.values[data::kFeatureCount + 1] = label;
  return rec;
}

}  // namespace

TEST_CASE("attack taxonomy") {
  CHECK(data::class_id("Normal") == 0);
  CHECK(data::class_id("Analysis") == 1);
  CHECK(data::class_id("Worms") == 9);
  CHECK(data::class_id("nope") == -1);
  CHECK(data::class_name(4) == "Exploits");
  for (std::size_t i = 0; i < data::kClassCount; ++i)
    CHECK(data::class_id(data::class_name(i)) == static_cast<int>(i));
}

TEST_CASE("load_csv") {
  SUBCASE("loads rows and reports the count mismatch as a warning") {
    auto path = write_file("mini.csv", testsupport::mini_unsw_csv(50, 1));
    auto result = data::load_csv(path.string(), data::Split::train);
    CHECK(result.records.size() == 50);
    REQUIRE(!result.warnings.empty());
    CHECK(result.warnings[0].find("175341") != std::string::npos);
    CHECK(result.records[0].values.size() == data::kRecordCells);
  }

  SUBCASE("accepts files without the id column") {
    auto path = write_file("noid.csv", testsupport::mini_unsw_csv(5, 2, /*with_id=*/false));
    auto result = data::load_csv(path.string(), data::Split::test);
    CHECK(result.records.size() == 5);
  }

  SUBCASE("empty file with a valid header gives zero records") {
    auto path = write_file("empty.csv", testsupport::csv_header(true) + "\n");
    auto result = data::load_csv(path.string(), data::Split::train);
    CHECK(result.records.empty());
  }

  SUBCASE("wrong cell count reports the line number") {
    std::string body = testsupport::mini_unsw_csv(2, 3);
    body += "1,2,3\n";  // line 4: 3 cells
    auto path = write_file("short_row.csv", body);
    try {
      data::load_csv(path.string(), data::Split::train);
      FAIL("expected contract_error");
    } catch (const contract_error& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }

  SUBCASE("unknown attack_cat raises") {
    std::string body = testsupport::mini_unsw_csv(1, 4);
    auto rec = make_record({}, "Martians", "1");
    body += "9";
    for (const std::string& v : rec.values) body += "," + v;
    body += "\n";
    auto path = write_file("bad_cat.csv", body);
    CHECK_THROWS_AS(data::load_csv(path.string(), data::Split::train), contract_error);
  }

  SUBCASE("missing file raises io_error") {
    CHECK_THROWS_AS(data::load_csv((temp_dir() / "nope.csv").string(), data::Split::train),
                    io_error);
  }

  SUBCASE("bad header raises io_error") {
    auto path = write_file("bad_header.csv", "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(data::load_csv(path.string(), data::Split::train), io_error);
  }
}

TEST_CASE("fit_encoder") {
  SUBCASE("vocabularies are sorted and deduplicated") {
    std::vector<data::RawRecord> recs = {
        make_record({{1, "tcp"}}), make_record({{1, "udp"}}), make_record({{1, "icmp"}}),
        make_record({{1, "tcp"}})};
    auto enc = data::fit_encoder(recs);
    CHECK(enc.vocab.at("proto") == std::vector<std::string>{"icmp", "tcp", "udp"});
    CHECK(enc.min_vals[1] == 0.0);
    CHECK(enc.max_vals[1] == 2.0);
  }

  SUBCASE("numeric min/max cover the training values") {
    std::vector<data::RawRecord> recs = {make_record({{0, "2.0"}}), make_record({{0, "8.0"}})};
    auto enc = data::fit_encoder(recs);
    CHECK(enc.min_vals[0] == 2.0);
    CHECK(enc.max_vals[0] == 8.0);
    CHECK_FALSE(enc.constant[0]);
  }

  SUBCASE("constant columns are flagged") {
    std::vector<data::RawRecord> recs = {make_record({{0, "5.0"}}), make_record({{0, "5.0"}})};
    auto enc = data::fit_encoder(recs);
    CHECK(enc.constant[0]);
  }

  SUBCASE("unparsable numeric cell names the column") {
    std::vector<data::RawRecord> recs = {make_record({{4, "abc"}})};
    try {
      data::fit_encoder(recs);
      FAIL("expected contract_error");
    } catch (const contract_error& e) {
      CHECK(std::string(e.what()).find("spkts") != std::string::npos);
    }
  }

  SUBCASE("empty input raises") { CHECK_THROWS_AS(data::fit_encoder({}), contract_error); }
}

TEST_CASE("transform") {
  std::vector<data::RawRecord> train = {
      make_record({{0, "2.0"}, {1, "icmp"}}),
      make_record({{0, "8.0"}, {1, "tcp"}}, "Exploits", "1"),
      make_record({{0, "5.0"}, {1, "udp"}}),
  };
  auto enc = data::fit_encoder(train);

  SUBCASE("numeric scaling maps min to 0 and max to 1") {
    auto frame = data::transform(train, enc, data::Split::train);
    CHECK(frame.at(0, 0) == 0.0f);
    CHECK(frame.at(1, 0) == 1.0f);
    CHECK(frame.at(2, 0) == 0.5f);
  }

  SUBCASE("categorical cells scale their vocabulary index") {
    auto frame = data::transform(train, enc, data::Split::train);
    // vocab [icmp, tcp, udp]: tcp -> index 1 -> 1/2
    CHECK(frame.at(1, 1) == 0.5f);
  }

  SUBCASE("test-split values outside the range clip") {
    std::vector<data::RawRecord> test = {make_record({{0, "10.0"}}),
                                         make_record({{0, "-3.0"}})};
    auto frame = data::transform(test, enc, data::Split::test);
    CHECK(frame.at(0, 0) == 1.0f);
    CHECK(frame.at(1, 0) == 0.0f);
  }

  SUBCASE("unseen categorical values clip to 0") {
    std::vector<data::RawRecord> test = {make_record({{1, "sctp"}})};
    auto frame = data::transform(test, enc, data::Split::test);
    CHECK(frame.at(0, 1) == 0.0f);
  }

  SUBCASE("constant columns map to 0") {
    auto frame = data::transform(train, enc, data::Split::train);
    CHECK(frame.at(0, 4) == 0.0f);  // spkts is constant "0"
  }

  SUBCASE("labels are extracted into both views") {
    auto frame = data::transform(train, enc, data::Split::train);
    CHECK(frame.binary_labels == std::vector<std::uint8_t>{0, 1, 0});
    CHECK(frame.class_labels == std::vector<std::uint8_t>{0, 4, 0});
    CHECK(frame.feature_names.size() == data::kFeatureCount);
  }
}

TEST_CASE("scaling and encoding invariants on a generated split") {
  auto csv = testsupport::mini_unsw_csv(120, 5);
  auto path = write_file("invariants.csv", csv);
  auto loaded = data::load_csv(path.string(), data::Split::train);
  auto enc = data::fit_encoder(loaded.records);
  auto frame = data::transform(loaded.records, enc, data::Split::train);

  SUBCASE("every training cell lies in [0, 1]") {
    for (float v : frame.matrix) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }

  SUBCASE("non-constant columns span exactly [0, 1] after scaling") {
    for (std::size_t c = 0; c < frame.n_cols; ++c) {
      float lo = 1e9f, hi = -1e9f;
      for (std::size_t r = 0; r < frame.n_rows; ++r) {
        lo = std::min(lo, frame.at(r, c));
        hi = std::max(hi, frame.at(r, c));
      }
      if (enc.constant[c]) {
        CHECK(lo == 0.0f);
        CHECK(hi == 0.0f);
      } else {
        CHECK(lo == 0.0f);
        CHECK(hi == 1.0f);
      }
    }
  }

  SUBCASE("encoding is deterministic") {
    auto enc2 = data::fit_encoder(loaded.records);
    auto frame2 = data::transform(loaded.records, enc2, data::Split::train);
    CHECK(enc2.to_json_string() == enc.to_json_string());
    CHECK(frame2.matrix == frame.matrix);
  }

  SUBCASE("binary label 0 coincides with class Normal") {
    for (std::size_t r = 0; r < frame.n_rows; ++r)
      CHECK((frame.binary_labels[r] == 0) == (frame.class_labels[r] == 0));
  }
}

TEST_CASE("class_weights") {
  data::FeatureFrame frame;
  frame.n_rows = 100;
  frame.n_cols = 1;
  frame.matrix.assign(100, 0.5f);
  frame.feature_names = {"f0"};
  frame.binary_labels.assign(100, 0);
  frame.class_labels.assign(100, 0);

  SUBCASE("two classes split 90/10") {
    for (std::size_t i = 90; i < 100; ++i) {
      frame.class_labels[i] = 1;
      frame.binary_labels[i] = 1;
    }
    auto w = data::class_weights(frame);
    CHECK(w[0] == doctest::Approx(0.5556).epsilon(1e-3));
    CHECK(w[1] == doctest::Approx(5.0).epsilon(1e-9));
    for (std::size_t c = 2; c < 10; ++c) CHECK(w[c] == 0.0);

    auto wb = data::binary_class_weights(frame);
    CHECK(wb[0] == doctest::Approx(100.0 / (2 * 90)).epsilon(1e-12));
    CHECK(wb[1] == doctest::Approx(5.0).epsilon(1e-12));
  }

  SUBCASE("balanced classes all weigh 1") {
    for (std::size_t i = 0; i < 100; ++i)
      frame.class_labels[i] = static_cast<std::uint8_t>(i / 10);
    auto w = data::class_weights(frame);
    for (double v : w) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("absent class gets weight 0 and the rest use the present count") {
    // classes 0..8 present (11 rows each except 0), class 9 absent
    for (std::size_t i = 0; i < 99; ++i)
      frame.class_labels[i] = static_cast<std::uint8_t>(i % 9);
    frame.class_labels[99] = 0;
    auto w = data::class_weights(frame);
    CHECK(w[9] == 0.0);
    CHECK(w[1] == doctest::Approx(100.0 / (9.0 * 11.0)).epsilon(1e-12));
  }

  SUBCASE("weighted mean of weights under the class distribution is 1") {
    RngStream rng(9);
    for (std::size_t i = 0; i < 100; ++i)
      frame.class_labels[i] = static_cast<std::uint8_t>(rng.next_below(7));
    auto w = data::class_weights(frame);
    std::vector<std::size_t> counts(10, 0);
    for (auto c : frame.class_labels) ++counts[c];
    double mean = 0;
    for (std::size_t c = 0; c < 10; ++c)
      mean += w[c] * static_cast<double>(counts[c]) / 100.0;
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("empty frame raises") {
    data::FeatureFrame empty;
    CHECK_THROWS_AS(data::class_weights(empty), contract_error);
  }
}

TEST_CASE("frame cache round trip") {
  auto csv = testsupport::mini_unsw_csv(40, 6);
  auto path = write_file("cache_src.csv", csv);
  auto loaded = data::load_csv(path.string(), data::Split::test);
  auto enc = data::fit_encoder(loaded.records);
  auto frame = data::transform(loaded.records, enc, data::Split::test);

  const std::string cache = (temp_dir() / "frame.eids").string();
  data::save_frame(frame, cache);

  SUBCASE("load(save(f)) is bitwise identical") {
    auto back = data::load_frame(cache);
    CHECK(back.matrix == frame.matrix);
    CHECK(back.feature_names == frame.feature_names);
    CHECK(back.binary_labels == frame.binary_labels);
    CHECK(back.class_labels == frame.class_labels);
    CHECK(back.split_tag == frame.split_tag);
  }

  SUBCASE("saving twice produces identical bytes") {
    const std::string again = (temp_dir() / "frame2.eids").string();
    data::save_frame(frame, again);
    std::ifstream a(cache, std::ios::binary), b(again, std::ios::binary);
    std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);
  }

  SUBCASE("truncation is a checksum error") {
    std::ifstream in(cache, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string truncated = (temp_dir() / "trunc.eids").string();
    std::ofstream out(truncated, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 12));
    out.close();
    try {
      data::load_frame(truncated);
      FAIL("expected io_error");
    } catch (const io_error& e) {
      CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
  }

  SUBCASE("wrong magic is a format error") {
    const std::string bogus = (temp_dir() / "bogus.eids").string();
    std::ofstream out(bogus, std::ios::binary | std::ios::trunc);
    out << "NOPEnope";
    out.close();
    try {
      data::load_frame(bogus);
      FAIL("expected io_error");
    } catch (const io_error& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }

  SUBCASE("corrupted payload is a checksum error") {
    std::ifstream in(cache, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    const std::string corrupt = (temp_dir() / "corrupt.eids").string();
    std::ofstream out(corrupt, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(data::load_frame(corrupt), io_error);
  }
}

TEST_CASE("encoder round trip and digest") {
  std::vector<data::RawRecord> recs = {make_record({{0, "1.5"}, {1, "udp"}}),
                                       make_record({{0, "4.5"}, {1, "tcp"}})};
  auto enc = data::fit_encoder(recs);
  auto back = data::EncoderState::from_json_string(enc.to_json_string());
  CHECK(back.to_json_string() == enc.to_json_string());
  CHECK(back.digest() == enc.digest());

  auto other = data::fit_encoder({make_record({{0, "2.5"}})});
  CHECK(other.digest() != enc.digest());
}

TEST_CASE("parse errors surface the source csv line") {
  std::string body = testsupport::csv_header(true) + "\n";
  auto good = make_record({});
  body += "1";
  for (const std::string& v : good.values) body += "," + v;
  body += "\n";
  auto bad = make_record({{7, "not-a-number"}});
  body += "2";
  for (const std::string& v : bad.values) body += "," + v;
  body += "\n";
  auto path = write_file("bad_numeric.csv", body);
  auto loaded = data::load_csv(path.string(), data::Split::train);
  try {
    data::fit_encoder(loaded.records);
    FAIL("expected contract_error");
  } catch (const contract_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dbytes") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
}
