#include <catch2/catch_amalgamated.hpp>

#include "cnlu/data.hpp"
#include "helpers.hpp"

using namespace cnlu;
using namespace cnlu::testing;

TEST_CASE("load_dataset reads the three-file layout") {
  TempDir tmp;
  write_toy_dataset(tmp.path.string());
  RawSplits s = load_dataset(tmp.path.string());
  REQUIRE(s.train.size() == 8);
  REQUIRE(s.valid.size() == 3);
  REQUIRE(s.test.size() == 3);
  REQUIRE(s.train[0].tokens == std::vector<std::string>{"book", "a", "flight", "to", "boston"});
  REQUIRE(s.train[0].slot_tags.back() == "B-city");
  REQUIRE(s.train[0].intent == "flight");
}

TEST_CASE("load_dataset accepts dev/ as the validation split") {
  TempDir tmp;
  write_toy_dataset(tmp.path.string());
  std::filesystem::rename(tmp.path / "valid", tmp.path / "dev");
  RawSplits s = load_dataset(tmp.path.string());
  REQUIRE(s.valid.size() == 3);
}

TEST_CASE("load_dataset reports missing files and misaligned rows") {
  TempDir tmp;
  write_toy_dataset(tmp.path.string());
  SECTION("missing split file") {
    std::filesystem::remove(tmp.path / "test" / "label");
    REQUIRE_THROWS_AS(load_dataset(tmp.path.string()), DataError);
  }
  SECTION("line-count mismatch across files") {
    write_file(tmp.file("train/label"), "flight\n");
    REQUIRE_THROWS_MATCHES(load_dataset(tmp.path.string()), DataError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("line counts differ")));
  }
  SECTION("token/tag arity mismatch names the line") {
    write_file(tmp.file("valid/seq.out"),
               "O O B-city\nO O O\nO O B-city O\n");  // line 2 has 3 tags for 4 tokens
    REQUIRE_THROWS_MATCHES(
        load_dataset(tmp.path.string()), DataError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 2")));
  }
  SECTION("empty utterance") {
    write_file(tmp.file("test/seq.in"), "book flights to denver\n\nwhat is the fare to boston\n");
    REQUIRE_THROWS_AS(load_dataset(tmp.path.string()), DataError);
  }
}

TEST_CASE("vocabulary reserves PAD and UNK and assigns dense ids") {
  Vocabulary v;
  REQUIRE(v.size() == 2);
  REQUIRE(v.id_to_token[Vocabulary::kPad] == std::string("<pad>"));
  REQUIRE(v.id_to_token[Vocabulary::kUnk] == std::string("<unk>"));
  REQUIRE(v.add("boston") == 2);
  REQUIRE(v.add("denver") == 3);
  REQUIRE(v.add("boston") == 2);  // idempotent
  REQUIRE(v.lookup("boston") == 2);
  REQUIRE(v.lookup("never-seen") == Vocabulary::kUnk);
}

TEST_CASE("build_vocab walks the training split in first-occurrence order") {
  TempDir tmp;
  write_toy_dataset(tmp.path.string());
  RawSplits s = load_dataset(tmp.path.string());
  Vocabulary v = build_vocab(s.train);
  REQUIRE(v.id_to_token[2] == "book");
  REQUIRE(v.id_to_token[3] == "a");
  REQUIRE(v.id_to_token[4] == "flight");
  REQUIRE(v.lookup("in") != Vocabulary::kUnk);  // appears only mid-split, still indexed
}

TEST_CASE("build_vocab honors min_count") {
  std::vector<RawExample> train = {
      {{"a", "b", "a"}, {"O", "O", "O"}, "x"},
      {{"b", "c"}, {"O", "O"}, "x"},
  };
  Vocabulary v = build_vocab(train, 2);
  REQUIRE(v.lookup("a") != Vocabulary::kUnk);
  REQUIRE(v.lookup("b") != Vocabulary::kUnk);
  REQUIRE(v.lookup("c") == Vocabulary::kUnk);  // freq 1 < min_count
  REQUIRE(v.size() == 4);                      // pad, unk, a, b
}

TEST_CASE("label maps take the union of all splits") {
  TempDir tmp;
  write_toy_dataset(tmp.path.string());
  // Add a test-only intent and slot tag.
  write_file(tmp.file("test/seq.in"), "book flights to denver\nhotel in boston on monday\nteleport me home\n");
  write_file(tmp.file("test/seq.out"), "O O O B-city\nO O B-city O B-day\nO O B-dest\n");
  write_file(tmp.file("test/label"), "flight\nhotel\nteleport\n");
  RawSplits s = load_dataset(tmp.path.string());
  LabelMaps maps = build_label_maps(s);
  REQUIRE(maps.num_intents() == 4);  // flight, fare, hotel + test-only teleport
  REQUIRE(maps.intent_id("teleport") == 3);
  REQUIRE(maps.slot_to_id.count("B-dest") == 1);
  REQUIRE_THROWS_AS(maps.intent_id("no-such"), LabelError);
  REQUIRE_THROWS_AS(maps.slot_id("B-no-such"), LabelError);
}

TEST_CASE("encode pads, aligns, and truncates") {
  Vocabulary v = toy_vocab();
  LabelMaps maps = toy_labels();
  RawExample raw{{"flight", "to", "boston"}, {"O", "O", "B-city"}, "flight"};

  SECTION("right padding with ignore tails") {
    EncodedExample ex = encode(raw, v, maps, 6);
    REQUIRE(ex.valid_len == 3);
    REQUIRE(ex.token_ids == std::vector<int>{4, 5, 6, 0, 0, 0});
    REQUIRE(ex.slot_ids == std::vector<int>{0, 0, 1, -1, -1, -1});
    REQUIRE(ex.intent_id == 0);
  }
  SECTION("OOV folds to UNK") {
    raw.tokens[0] = "shuttle";
    EncodedExample ex = encode(raw, v, maps, 4);
    REQUIRE(ex.token_ids[0] == Vocabulary::kUnk);
  }
  SECTION("truncation clamps and counts") {
    int truncated = 0;
    EncodedExample ex = encode(raw, v, maps, 2, &truncated);
    REQUIRE(ex.valid_len == 2);
    REQUIRE(ex.token_ids == std::vector<int>{4, 5});
    REQUIRE(truncated == 1);
  }
  SECTION("empty utterance is rejected") {
    raw.tokens.clear();
    raw.slot_tags.clear();
    REQUIRE_THROWS_AS(encode(raw, v, maps, 4), DimensionError);
  }
}

TEST_CASE("encode_split aggregates truncation counts") {
  TempDir tmp;
  write_toy_dataset(tmp.path.string());
  RawSplits s = load_dataset(tmp.path.string());
  Vocabulary v = build_vocab(s.train);
  LabelMaps maps = build_label_maps(s);
  EncodedDataset enc = encode_split(s.train, v, maps, 4);
  REQUIRE(enc.size() == 8);
  int longer_than_4 = 0;
  for (const RawExample& ex : s.train)
    if (ex.tokens.size() > 4) ++longer_than_4;
  REQUIRE(enc.truncated == longer_than_4);
  REQUIRE(enc.truncated > 0);
}

TEST_CASE("word-vector loading copies covered rows and seeds the rest") {
  TempDir tmp;
  Vocabulary v;
  v.add("hello");
  v.add("world");
  const std::string path = tmp.file("vec.txt");

  SECTION("happy path with a superset file") {
    write_file(path,
               "hello 0.1 0.2\n"
               "extra 9 9\n"
               "world -1 0.5\n");
    CoverageReport cov;
    Tensor<float> t = load_word_vectors(path, v, 2, 7, &cov);
    REQUIRE(t.shape == Shape{4, 2});
    REQUIRE(t.row(Vocabulary::kPad)[0] == 0.0f);
    REQUIRE(t.row(Vocabulary::kPad)[1] == 0.0f);
    REQUIRE(t.row(2)[0] == Catch::Approx(0.1));
    REQUIRE(t.row(2)[1] == Catch::Approx(0.2));
    REQUIRE(t.row(3)[0] == Catch::Approx(-1.0));
    REQUIRE(cov.covered == 2);
    REQUIRE(cov.uncovered == 1);  // UNK
    // UNK row is random but nonzero with overwhelming probability.
    REQUIRE((t.row(1)[0] != 0.0f || t.row(1)[1] != 0.0f));
  }
  SECTION("uncovered rows are deterministic in the seed") {
    write_file(path, "hello 0.1 0.2\n");
    Tensor<float> a = load_word_vectors(path, v, 2, 123);
    Tensor<float> b = load_word_vectors(path, v, 2, 123);
    Tensor<float> c = load_word_vectors(path, v, 2, 124);
    REQUIRE(a.data == b.data);
    REQUIRE(a.data != c.data);
  }
  SECTION("dimension mismatch is a configuration error") {
    write_file(path, "hello 0.1 0.2 0.3\n");
    REQUIRE_THROWS_AS(load_word_vectors(path, v, 2, 7), ConfigError);
  }
  SECTION("ragged arity names the line") {
    write_file(path, "hello 0.1 0.2\nworld 0.3\n");
    REQUIRE_THROWS_MATCHES(
        load_word_vectors(path, v, 2, 7), DataError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 2")));
  }
  SECTION("non-numeric component is a data error") {
    write_file(path, "hello 0.1 oops\n");
    REQUIRE_THROWS_AS(load_word_vectors(path, v, 2, 7), DataError);
  }
  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_word_vectors(tmp.file("absent.txt"), v, 2, 7), DataError);
  }
}

TEST_CASE("bundled ATIS and Snips match their recorded shapes") {
  const std::string root = std::string(CNLU_REPO_DIR) + "/data";
  if (!file_exists(root + "/atis/train/seq.in")) SKIP("bundled datasets not present");

  RawSplits atis = load_dataset(root + "/atis");
  REQUIRE(atis.train.size() == 4478);
  REQUIRE(atis.valid.size() == 500);
  REQUIRE(atis.test.size() == 893);
  LabelMaps atis_maps = build_label_maps(atis);
  REQUIRE(atis_maps.num_intents() == 22);
  REQUIRE(atis_maps.num_slots() == 127);

  RawSplits snips = load_dataset(root + "/snips");
  REQUIRE(snips.train.size() == 13084);
  REQUIRE(snips.valid.size() == 700);
  REQUIRE(snips.test.size() == 700);
  LabelMaps snips_maps = build_label_maps(snips);
  REQUIRE(snips_maps.num_intents() == 7);
  REQUIRE(snips_maps.num_slots() == 72);
}
