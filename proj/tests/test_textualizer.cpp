// Prompt rendering: rank partitions, series narratives, policy sentences,
// variant paragraphs, document structure, and the checked-in golden prompts.
#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epicast/dataset.hpp"
#include "epicast/synthetic.hpp"
#include "epicast/textualizer.hpp"

using namespace epicast;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(EPICAST_TEST_DIR) + "/fixtures/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos;
         at = text.find(needle, at + needle.size()))
        ++n;
    return n;
}

// Arithmetic windows make the fitted slope equal the common difference.
std::vector<double> arith(double start, double step, int n = 4) {
    std::vector<double> w;
    for (int k = 0; k < n; ++k) w.push_back(start + step * k);
    return w;
}

// The golden-fixture dataset; the recipe is pinned and must never change.
const Dataset& golden_dataset() {
    static const Dataset ds = [] {
        SyntheticConfig cfg;
        cfg.n_states = 8;
        cfg.n_weeks = 60;
        return assemble_dataset(generate_synthetic(cfg, 2024), 12);
    }();
    return ds;
}

const DataRecord& golden_record(int state_pos, int week) {
    const Dataset& ds = golden_dataset();
    const int idx =
        ds.record_index(ds.panels.states[static_cast<std::size_t>(state_pos)].code, week);
    REQUIRE(idx >= 0);
    return ds.records[static_cast<std::size_t>(idx)];
}

} // namespace

TEST_CASE("rank_label partitions 1..50 into the five canonical bands") {
    for (int r = 1; r <= 50; ++r) {
        const std::string label = rank_label(r, 50);
        if (r <= 5) CHECK(label == "One of the best");
        else if (r <= 20) CHECK(label == "Higher than the national average");
        else if (r <= 30) CHECK(label == "Close to the national average");
        else if (r <= 45) CHECK(label == "Lower than the national average");
        else CHECK(label == "One of the lowest");
    }
}

TEST_CASE("rank_label scales the partition to other roster sizes") {
    // N = 10: cuts at round(0.1/0.4/0.6/0.9 * 10) = 1, 4, 6, 9
    CHECK(rank_label(1, 10) == "One of the best");
    CHECK(rank_label(2, 10) == "Higher than the national average");
    CHECK(rank_label(4, 10) == "Higher than the national average");
    CHECK(rank_label(5, 10) == "Close to the national average");
    CHECK(rank_label(6, 10) == "Close to the national average");
    CHECK(rank_label(7, 10) == "Lower than the national average");
    CHECK(rank_label(9, 10) == "Lower than the national average");
    CHECK(rank_label(10, 10) == "One of the lowest");
    // default argument is the 50-state roster
    CHECK(rank_label(3) == "One of the best");
    CHECK_THROWS_AS(rank_label(0, 10), Error);
    CHECK_THROWS_AS(rank_label(11, 10), Error);
    CHECK_THROWS_AS(rank_label(1, 0), Error);
}

TEST_CASE("series_narrative picks direction and pace from the fitted slope") {
    CHECK(series_narrative({10.0, 10.0, 10.0, 10.0}) == "remained stable over the recent weeks");
    CHECK(series_narrative(arith(10.0, 0.35)) == "increased slowly over the recent weeks");
    CHECK(series_narrative(arith(10.0, 1.0)) == "increased moderately over the recent weeks");
    CHECK(series_narrative(arith(10.0, 2.5)) == "increased rapidly over the recent weeks");
    CHECK(series_narrative(arith(10.0, -0.25)) == "decreased slowly over the recent weeks");
    CHECK(series_narrative(arith(10.0, -1.0)) == "decreased moderately over the recent weeks");
    CHECK(series_narrative(arith(10.0, -3.0)) == "decreased rapidly over the recent weeks");
    // tiny relative drift stays stable
    CHECK(series_narrative(arith(100.0, 0.3)) == "remained stable over the recent weeks");
    // only the last four points set the slope; the whole window sets the scale
    CHECK(series_narrative({0.0, 0.0, 0.0, 0.0, 10.0, 12.0, 14.0, 16.0}) ==
          "increased rapidly over the recent weeks");
    CHECK_THROWS_AS(series_narrative({1.0, 2.0, 3.0}), Error);
    try {
        series_narrative({1.0});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::WindowTooShort);
    }
}

TEST_CASE("policy_text renders stable and transitioning policies") {
    PolicyLevels prev{1, 0, 1, 1, 0};
    PolicyLevels now{0, 0, 1, 1, 1};
    const auto items = policy_text(now, prev);
    REQUIRE(items.size() == 5);
    CHECK(items[0] == "the school policy moving from recommend closing to no measures");
    CHECK(items[1] == "the workplace policy remains no measures");
    CHECK(items[2] == "the public events policy remains recommend canceling");
    CHECK(items[3] == "the gathering policy remains restrictions on very large gatherings");
    CHECK(items[4] ==
          "the elderly protection policy moving from no measures to recommended isolation and "
          "visitor restriction");
}

TEST_CASE("genomic_text filters variants by current share") {
    GenomicVariantWindow active;
    active.info = {"AX.1", VariantAttr::Higher, VariantAttr::Comparable, VariantAttr::Higher};
    active.shares = {0.0, 0.01, 0.05, 0.20};
    GenomicVariantWindow dormant;
    dormant.info = {"BY.2", VariantAttr::Higher, VariantAttr::Higher, VariantAttr::Comparable};
    dormant.shares = {0.0, 0.0, 0.0, 0.005}; // at most 1 percent now

    SECTION("toggle off yields an empty string") {
        CHECK(genomic_text({active}, false).empty());
    }
    SECTION("no eligible variant yields the fallback sentence") {
        CHECK(genomic_text({dormant}, true) ==
              "Genomic surveillance does not attribute a meaningful share of current samples to "
              "any tracked emerging variant.");
        CHECK(genomic_text({}, true) ==
              "Genomic surveillance does not attribute a meaningful share of current samples to "
              "any tracked emerging variant.");
    }
    SECTION("active variants get one sentence each") {
        const std::string text = genomic_text({active, dormant}, true);
        CHECK(text.find("The variant AX.1 shows higher infectiousness, comparable severity, and "
                        "higher immune resistance") != std::string::npos);
        CHECK(text.find("BY.2") == std::string::npos); // below the share floor
        CHECK(text.find("increased rapidly over the recent weeks") != std::string::npos);
    }
}

TEST_CASE("previous-infection bands") {
    CHECK(detail::pi_band(0.0) == "below one percent");
    CHECK(detail::pi_band(0.0099) == "below one percent");
    CHECK(detail::pi_band(0.01) == "between one and three percent");
    CHECK(detail::pi_band(0.0299) == "between one and three percent");
    CHECK(detail::pi_band(0.03) == "between three and ten percent");
    CHECK(detail::pi_band(0.099) == "between three and ten percent");
    CHECK(detail::pi_band(0.10) == "between ten and thirty percent");
    CHECK(detail::pi_band(0.299) == "between ten and thirty percent");
    CHECK(detail::pi_band(0.30) == "above thirty percent");
    CHECK(detail::pi_band(0.95) == "above thirty percent");
}

TEST_CASE("count_words counts whitespace tokens") {
    CHECK(count_words("") == 0);
    CHECK(count_words("one") == 1);
    CHECK(count_words("  spread   out\twords\nacross lines ") == 5);
}

TEST_CASE("assemble_prompt structure invariants hold across the whole panel") {
    const Dataset& ds = golden_dataset();
    const std::string series_token(kTimeSeriesToken);
    for (const Horizon h : {Horizon::OneWeek, Horizon::ThreeWeek}) {
        for (std::size_t i = 0; i < ds.records.size(); i += 7) { // stride for speed
            const DataRecord& rec = ds.records[i];
            const PromptDocument doc = assemble_prompt(rec, h, nullptr);

            // exactly one special token
            REQUIRE(count_occurrences(doc.text, series_token) == 1);
            // word-count band and self-consistency
            REQUIRE(doc.word_count >= 250);
            REQUIRE(doc.word_count <= 400);
            REQUIRE(doc.word_count == count_words(doc.text));
            // the reported index addresses the series token
            REQUIRE(doc.special_token_index >= 0);
            std::istringstream in(doc.text);
            std::string word;
            for (int k = 0; k <= doc.special_token_index; ++k) REQUIRE((in >> word));
            REQUIRE(word == series_token + ".");
            // inference mode ends with the bare answer suffix
            REQUIRE(doc.target_token.empty());
            REQUIRE(doc.text.size() >= doc.answer_suffix.size());
            REQUIRE(doc.text.substr(doc.text.size() - doc.answer_suffix.size()) ==
                    doc.answer_suffix);
            // horizon phrasing
            const bool three = h == Horizon::ThreeWeek;
            REQUIRE(doc.text.find(three ? "for the upcoming three weeks"
                                        : "for the upcoming week") != std::string::npos);
        }
    }
}

TEST_CASE("training mode appends exactly the class token") {
    const DataRecord& rec = golden_record(3, 25);
    for (int ord = 1; ord <= 5; ++ord) {
        const HtcClass target{ord};
        const PromptDocument inf = assemble_prompt(rec, Horizon::OneWeek, nullptr);
        const PromptDocument trn = assemble_prompt(rec, Horizon::OneWeek, &target);
        REQUIRE(trn.target_token == class_token(ord));
        REQUIRE(trn.text == inf.text + " " + class_token(ord));
        // word_count reflects the inference text in both modes
        REQUIRE(trn.word_count == inf.word_count);
        REQUIRE(trn.special_token_index == inf.special_token_index);
    }
}

TEST_CASE("genomic toggle changes only the genomic paragraph") {
    for (int week : {15, 30, 55}) {
        const DataRecord& rec = golden_record(2, week);
        DataRecord off = rec;
        off.include_genomic = false;
        const std::string with = assemble_prompt(rec, Horizon::OneWeek, nullptr).text;
        const std::string without = assemble_prompt(off, Horizon::OneWeek, nullptr).text;

        const std::string genomic = genomic_text(rec.genomic, true);
        REQUIRE_FALSE(genomic.empty());
        // the with-genomic text is the without-genomic text plus one paragraph
        const std::string needle = "\n\n" + genomic + "\n\n" + std::string("The answer is");
        REQUIRE(with.find(needle) != std::string::npos);
        std::string reduced = with;
        const std::size_t at = reduced.find("\n\n" + genomic);
        reduced.erase(at, genomic.size() + 2);
        REQUIRE(reduced == without);
    }
}

TEST_CASE("prompt rendering is deterministic") {
    const DataRecord& rec = golden_record(5, 40);
    const PromptDocument a = assemble_prompt(rec, Horizon::ThreeWeek, nullptr);
    const PromptDocument b = assemble_prompt(rec, Horizon::ThreeWeek, nullptr);
    REQUIRE(a.text == b.text);
    REQUIRE(a.special_token_index == b.special_token_index);
    REQUIRE(a.word_count == b.word_count);
}

TEST_CASE("golden prompt fixtures render byte-identical") {
    // G1: inference, 1-week horizon.
    {
        const PromptDocument doc = assemble_prompt(golden_record(1, 20), Horizon::OneWeek, nullptr);
        REQUIRE(doc.text == slurp(fixture_path("golden_prompt_1.txt")));
    }
    // G2: inference, 3-week horizon, two active variants.
    {
        const PromptDocument doc =
            assemble_prompt(golden_record(4, 50), Horizon::ThreeWeek, nullptr);
        REQUIRE(doc.text == slurp(fixture_path("golden_prompt_2.txt")));
    }
    // G3: training mode with the realized label appended.
    {
        const DataRecord& rec = golden_record(6, 30);
        std::vector<double> hr;
        for (const auto& p : golden_dataset().panels.epi.at(rec.state.code).points)
            hr.push_back(p.hosp_rate);
        const HtcClass target = categorize(hosp_trend(hr, 30, Horizon::OneWeek));
        const PromptDocument doc = assemble_prompt(rec, Horizon::OneWeek, &target);
        REQUIRE(doc.text == slurp(fixture_path("golden_prompt_3.txt")));
    }
    // G1 with genomic surveillance off.
    {
        DataRecord rec = golden_record(1, 20);
        rec.include_genomic = false;
        const PromptDocument doc = assemble_prompt(rec, Horizon::OneWeek, nullptr);
        REQUIRE(doc.text == slurp(fixture_path("golden_prompt_1_nogenomic.txt")));
    }
}
