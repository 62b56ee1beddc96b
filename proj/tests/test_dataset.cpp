#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "gfte/error.hpp"
#include <json.hpp>

#include "gfte/checkpoint.hpp"
#include "gfte/dataset.hpp"
#include "gfte/generator.hpp"
#include "gfte/scitsr.hpp"

#include "helpers.hpp"

using namespace gfte;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case; removed on destruction.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string str(const std::string& rel = "") const { return (dir / rel).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream os(path, std::ios::binary);
  os << content;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

std::vector<TableInstance> sample_tables(int n, std::uint64_t seed = 11) {
  GenSpec spec;
  spec.n_tables = n;
  spec.merge_probability = 0.5;
  spec.seed = seed;
  return generate_tables(spec);
}

// Minimal SciTSR pair: 2x2 with a column-spanning header, chunk boxes in
// PDF coordinates (y up).
void write_scitsr_pair(const fs::path& dir, const std::string& stem) {
  nlohmann::json st;
  st["cells"] = nlohmann::json::array(
      {{{"id", 0},
        {"content", nlohmann::json::array({"total", "assets"})},
        {"start_row", 0},
        {"end_row", 0},
        {"start_col", 0},
        {"end_col", 1}},
       {{"id", 1},
        {"content", nlohmann::json::array({"2018"})},
        {"start_row", 1},
        {"end_row", 1},
        {"start_col", 0},
        {"end_col", 0}},
       {{"id", 2},
        {"content", nlohmann::json::array({"2019"})},
        {"start_row", 1},
        {"end_row", 1},
        {"start_col", 1},
        {"end_col", 1}}});
  nlohmann::json ch;
  // pos = [x1, x2, y1, y2]; the header sits ABOVE in PDF space (larger y)
  ch["chunks"] = nlohmann::json::array({
      {{"pos", nlohmann::json::array({100.0, 200.0, 720.0, 730.0})},
       {"text", "total assets"}},
      {{"pos", nlohmann::json::array({100.0, 140.0, 700.0, 710.0})}, {"text", "2018"}},
      {{"pos", nlohmann::json::array({160.0, 200.0, 700.0, 710.0})}, {"text", "2019"}},
  });
  write_file((dir / "structure" / (stem + ".json")).string(), st.dump(2));
  write_file((dir / "chunk" / (stem + ".chunk")).string(), ch.dump(2));
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("table json round trip preserves every field") {
  Scratch sc("gfte_tbl_rt");
  TableInstance t = testutil::grid_with_colspan();
  t.unit = "万元";
  t.cells[1].placeholder = true;
  t.cells[1].text.clear();
  t.cells[2].text = "caf\xc3\xa9 -1.5%";  // utf-8 survives
  t.cells[2].bbox = {60.1, 60.25, 89.0 + 1.0 / 3.0, 90.0000001};  // awkward doubles

  const std::string path = sc.str("t.json");
  const std::string img = sc.str("t.pgm");
  save_table_json(t, path);
  write_pgm(img, t.image);
  TableInstance back = load_table_lenient(path, img);

  CHECK(back.source_id == t.source_id);
  CHECK(back.n_rows == t.n_rows);
  CHECK(back.n_cols == t.n_cols);
  REQUIRE(back.unit.has_value());
  CHECK(*back.unit == "万元");
  CHECK(back.table_bbox == t.table_bbox);
  REQUIRE(back.cells.size() == t.cells.size());
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    CHECK(back.cells[i].id == t.cells[i].id);
    CHECK(back.cells[i].text == t.cells[i].text);
    CHECK(back.cells[i].bbox == t.cells[i].bbox);  // exact doubles
    CHECK(back.cells[i].row_start == t.cells[i].row_start);
    CHECK(back.cells[i].row_end == t.cells[i].row_end);
    CHECK(back.cells[i].col_start == t.cells[i].col_start);
    CHECK(back.cells[i].col_end == t.cells[i].col_end);
    CHECK(back.cells[i].placeholder == t.cells[i].placeholder);
  }

  // absent unit stays absent
  TableInstance nounit = testutil::grid2x2();
  save_table_json(nounit, path);
  CHECK_FALSE(load_table_lenient(path, img).unit.has_value());
}

TEST_CASE("dataset write/read round trip with stats") {
  Scratch sc("gfte_ds_rt");
  auto tables = sample_tables(6);
  DatasetManifest written = write_dataset(tables, sc.str(), "unit test corpus");
  CHECK(written.entries.size() == 6);
  CHECK(written.stats.tables == 6);

  DatasetManifest m = read_manifest(sc.str());
  CHECK(m.entries.size() == 6);
  CHECK(m.stats.cells == written.stats.cells);

  auto loaded = load_dataset(m);
  REQUIRE(loaded.size() == tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    CHECK(loaded[i].source_id == tables[i].source_id);
    CHECK(loaded[i].cells.size() == tables[i].cells.size());
    // pgm storage is 8-bit; the raster comes back quantized but then exact
    const Grayscale expect = (tables[i].image * 255.0f + 0.5f).floor() / 255.0f;
    CHECK((loaded[i].image == expect).all());
  }
}

TEST_CASE("dataset fingerprint tracks content") {
  Scratch sc("gfte_ds_fp");
  auto tables = sample_tables(3);
  write_dataset(tables, sc.str());
  DatasetManifest m = read_manifest(sc.str());
  const std::string fp1 = dataset_fingerprint(m);
  CHECK(fp1 == dataset_fingerprint(m));  // stable

  // flip one byte in one image
  const std::string img_path = sc.str(m.entries[1].image_path);
  std::string bytes = read_file(img_path);
  bytes[bytes.size() - 1] = static_cast<char>(bytes[bytes.size() - 1] ^ 0x01);
  write_file(img_path, bytes);
  CHECK(dataset_fingerprint(m) != fp1);
}

TEST_CASE("manifest errors") {
  Scratch sc("gfte_manifest_err");
  CHECK_THROWS_AS(read_manifest(sc.str()), DataError);  // no manifest.json

  auto tables = sample_tables(2);
  write_dataset(tables, sc.str());

  SUBCASE("missing referenced file") {
    DatasetManifest m = read_manifest(sc.str());
    fs::remove(sc.str(m.entries[0].image_path));
    CHECK_THROWS_AS(read_manifest(sc.str()), DataError);
  }
  SUBCASE("unknown manifest key") {
    nlohmann::json j = nlohmann::json::parse(read_file(sc.str("manifest.json")));
    j["surprise"] = true;
    write_file(sc.str("manifest.json"), j.dump());
    CHECK_THROWS_AS(read_manifest(sc.str()), DataError);
  }
  SUBCASE("future format version") {
    nlohmann::json j = nlohmann::json::parse(read_file(sc.str("manifest.json")));
    j["format_version"] = 99;
    write_file(sc.str("manifest.json"), j.dump());
    CHECK_THROWS_AS(read_manifest(sc.str()), DataError);
  }
  SUBCASE("stats that disagree with the entries") {
    nlohmann::json j = nlohmann::json::parse(read_file(sc.str("manifest.json")));
    j["stats"]["cells"] = 12345;
    write_file(sc.str("manifest.json"), j.dump());
    DatasetManifest m = read_manifest(sc.str());
    CHECK_THROWS_AS(load_dataset(m), DataError);
  }
}

TEST_CASE("strict load rejects an invalid table or mismatched raster") {
  Scratch sc("gfte_strict");
  TableInstance t = testutil::grid2x2();
  write_dataset({t}, sc.str());
  DatasetManifest m = read_manifest(sc.str());
  const std::string tpath = sc.str(m.entries[0].table_path);
  const std::string ipath = sc.str(m.entries[0].image_path);
  CHECK_NOTHROW(load_table(tpath, ipath));

  SUBCASE("invalid annotation") {
    TableInstance bad = t;
    bad.cells[0].row_end = 9;  // span outside grid
    save_table_json(bad, tpath);
    CHECK_THROWS_AS(load_table(tpath, ipath), DataError);
  }
  SUBCASE("grossly wrong aspect ratio") {
    write_pgm(ipath, Grayscale::Constant(4, 400, 1.0f));
    CHECK_THROWS_AS(load_table(tpath, ipath), DataError);
  }
  SUBCASE("lenient load accepts both") {
    TableInstance bad = t;
    bad.cells[0].row_end = 9;
    save_table_json(bad, tpath);
    CHECK_NOTHROW(load_table_lenient(tpath, ipath));
  }
}

TEST_CASE("filter pipeline partitions and codes its rejections") {
  Scratch sc("gfte_filter");
  auto tables = sample_tables(5);
  write_dataset(tables, sc.str());
  DatasetManifest m = read_manifest(sc.str());

  // plant defects in entries 0..3, keep 4 clean
  auto plant = [&](std::size_t i, auto mutate) {
    TableInstance t =
        load_table_lenient(sc.str(m.entries[i].table_path), sc.str(m.entries[i].image_path));
    mutate(t);
    save_table_json(t, sc.str(m.entries[i].table_path));
  };
  plant(0, [](TableInstance& t) { t.cells[0].bbox = {50, 10, 40, 40}; });  // F1/F2
  plant(1, [](TableInstance& t) { t.cells[1].id = t.cells[0].id; });       // F3
  plant(2, [](TableInstance& t) { t.cells.resize(1); });                   // F4
  plant(3, [](TableInstance& t) { t.n_rows = 0; });                        // F5

  FilterResult res = filter_dataset(m);
  CHECK(res.accepted.entries.size() + res.rejected.size() == m.entries.size());
  CHECK(res.accepted.entries.size() == 1);
  CHECK(res.tables.size() == 1);
  CHECK(res.tables[0].source_id == tables[4].source_id);

  // each rejection carries a filter code
  for (const RejectedEntry& r : res.rejected) {
    INFO(r.entry.table_path, " -> ", r.reason);
    CHECK(r.reason.substr(0, 1) == "F");
  }

  // unreadable file becomes an IO rejection, not an exception
  fs::remove(sc.str(m.entries[2].table_path));
  FilterResult res2 = filter_dataset(m);
  bool io_seen = false;
  for (const RejectedEntry& r : res2.rejected) io_seen |= r.reason.substr(0, 2) == "IO";
  CHECK(io_seen);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Scratch sc("gfte_ckpt");
  ModelConfig cfg;
  cfg.variant = Variant::PosText;
  cfg.k = 4;
  cfg.gcn_hidden = 8;
  cfg.text_hidden = 6;
  cfg.embed_dim = 4;
  cfg.mlp_hidden = 10;
  cfg.max_text_len = 8;
  cfg.seed = 12;
  Vocabulary vocab({U'0', U'1', U'a'}, 8);
  GfteModel<float> model = GfteModel<float>::build(cfg, vocab);
  // nudge the weights so we are not round-tripping a fresh init
  for (const auto& [name, t] : model.params().entries())
    for (Index i = 0; i < t.numel(); ++i) t.node()->value[i] += 0.001f * static_cast<float>(i % 7);

  const std::string path = sc.str("m.ckpt");
  save_checkpoint(model, path);
  GfteModel<float> back = load_checkpoint(path);

  CHECK(back.config().fingerprint() == model.config().fingerprint());
  CHECK(back.config().vocab_fingerprint == vocab.fingerprint());
  CHECK(back.vocab().mapping() == vocab.mapping());
  REQUIRE(back.params().size() == model.params().size());
  for (std::size_t i = 0; i < model.params().entries().size(); ++i) {
    const auto& ta = model.params().entries()[i].second;
    const auto& tb = back.params().entries()[i].second;
    REQUIRE(ta.shape() == tb.shape());
    for (Index j = 0; j < ta.numel(); ++j) CHECK(ta.value()[j] == tb.value()[j]);  // bitwise
  }

  // saving the reloaded model reproduces the file byte for byte
  const std::string path2 = sc.str("m2.ckpt");
  save_checkpoint(back, path2);
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("checkpoint corruption raises data errors") {
  Scratch sc("gfte_ckpt_bad");
  ModelConfig cfg;
  cfg.k = 2;
  cfg.gcn_hidden = 4;
  cfg.mlp_hidden = 4;
  cfg.seed = 3;
  GfteModel<float> model = GfteModel<float>::build(cfg, Vocabulary{});
  const std::string path = sc.str("m.ckpt");
  save_checkpoint(model, path);
  const std::string good = read_file(path);

  SUBCASE("bad magic") {
    write_file(path, "NOTACKPT" + good.substr(8));
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("future version in the magic") {
    write_file(path, std::string("GFTECKP9") + good.substr(8));
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("truncated file") {
    write_file(path, good.substr(0, good.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("flipped blob byte fails the checksum") {
    std::string bad = good;
    bad[bad.size() - 2] = static_cast<char>(bad[bad.size() - 2] ^ 0x40);
    write_file(path, bad);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_checkpoint(sc.str("nope.ckpt")), DataError); }
}

TEST_CASE("scitsr fixture loads with flipped y and joined tokens") {
  Scratch sc("gfte_scitsr");
  write_scitsr_pair(sc.dir, "t1");
  TableInstance t = load_scitsr_table(sc.str("structure/t1.json"), sc.str("chunk/t1.chunk"));

  CHECK(t.source_id == "t1");
  CHECK(t.n_rows == 2);
  CHECK(t.n_cols == 2);
  REQUIRE(t.cells.size() == 3);
  CHECK(t.cells[0].text == "total assets");
  CHECK(t.cells[0].col_end == 1);
  // header had the larger PDF y, so after the flip it sits on top
  CHECK(t.cells[0].bbox.y0 < t.cells[1].bbox.y0);
  CHECK(validate_table(t).ok());
  CHECK(t.image.rows() > 0);
}

TEST_CASE("scitsr directory loader sorts and pairs files") {
  Scratch sc("gfte_scitsr_dir");
  write_scitsr_pair(sc.dir, "b");
  write_scitsr_pair(sc.dir, "a");
  write_scitsr_pair(sc.dir, "c");
  auto tables = load_scitsr_dir(sc.str());
  REQUIRE(tables.size() == 3);
  CHECK(tables[0].source_id == "a");
  CHECK(tables[1].source_id == "b");
  CHECK(tables[2].source_id == "c");

  fs::remove(sc.str("chunk/b.chunk"));
  CHECK_THROWS_AS(load_scitsr_dir(sc.str()), DataError);
  CHECK_THROWS_AS(load_scitsr_dir(sc.str("structure")), DataError);  // wrong layout
}

TEST_CASE("scitsr faulty samples are rejected") {
  Scratch sc("gfte_scitsr_bad");
  write_scitsr_pair(sc.dir, "t");
  // drop one chunk so counts disagree
  nlohmann::json ch = nlohmann::json::parse(read_file(sc.str("chunk/t.chunk")));
  ch["chunks"].erase(2);
  write_file(sc.str("chunk/t.chunk"), ch.dump());
  CHECK_THROWS_AS(load_scitsr_table(sc.str("structure/t.json"), sc.str("chunk/t.chunk")),
                  DataError);
}

}  // TEST_SUITE
