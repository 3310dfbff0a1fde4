#include "askeval/core.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace askeval;
using askeval::testing::make_behavior_instance;
using askeval::testing::make_instance;

TEST_CASE("enum spellings round-trip") {
    for (Outcome o : {Outcome::correct, Outcome::wrong, Outcome::still_asking, Outcome::skipped,
                      Outcome::protocol_violation, Outcome::ungraded}) {
        CHECK(parse_outcome(to_string(o)) == o);
    }
    for (Dimension d : {Dimension::ask_mind, Dimension::ask_overconfidence, Dimension::behavior}) {
        CHECK(parse_dimension(to_string(d)) == d);
    }
    CHECK(parse_dimension("mind") == Dimension::ask_mind);
    CHECK(parse_dimension("overconfidence") == Dimension::ask_overconfidence);
    CHECK(parse_protocol("hard") == Protocol::hard);
    CHECK(parse_prompt_mode(to_string(PromptMode::self_alert)) == PromptMode::self_alert);
    CHECK_THROWS_AS(parse_guidance("loud"), ValidationError);
}

TEST_CASE("checkpoint kind decides who resolves it") {
    CHECK(resolver_for(CheckpointKind::missing_info) == Resolver::user_provides);
    CHECK(resolver_for(CheckpointKind::misleading_claim) == Resolver::assistant_corrects);
    CHECK(checkpoint_kind_for(Dimension::ask_overconfidence) == CheckpointKind::misleading_claim);
}

TEST_CASE("whitespace normalization") {
    CHECK(normalize_whitespace("  a \n\t b  ") == "a b");
    CHECK(normalize_whitespace("") == "");
    CHECK(normalize_whitespace(" \n ") == "");
}

TEST_CASE("checkpoint matching ignores whitespace differences only") {
    Instance i = make_instance("q1");
    auto hit = checkpoint_match("  detail 1   of\nq1 ", i);
    REQUIRE(hit.has_value());
    CHECK(hit->text == "detail 1 of q1");
    CHECK_FALSE(checkpoint_match("Detail 1 of q1", i).has_value());
    CHECK_FALSE(checkpoint_match("", i).has_value());
}

TEST_CASE("instance validation") {
    CHECK_NOTHROW(validate(make_instance("ok")));

    SUBCASE("variant must differ from the original") {
        Instance i = make_instance("a");
        i.variant_query = " " + i.original_query + "\n";
        CHECK_THROWS_AS(validate(i), ValidationError);
    }
    SUBCASE("checkpoints must be nonempty and distinct") {
        Instance i = make_instance("a", "math", 0);
        CHECK_THROWS_AS(validate(i), ValidationError);
        i = make_instance("a");
        i.checkpoints[1].text = "detail  1 of a";
        CHECK_THROWS_AS(validate(i), ValidationError);
    }
    SUBCASE("checkpoint kind follows the dimension") {
        Instance i = make_instance("a", "math", 2, Dimension::ask_overconfidence);
        CHECK_NOTHROW(validate(i));
        i.checkpoints[0].kind = CheckpointKind::missing_info;
        CHECK_THROWS_AS(validate(i), ValidationError);
    }
    SUBCASE("behavior items need a label and no rubric") {
        Instance b = make_behavior_instance("b", Clarity::vague);
        CHECK_NOTHROW(validate(b));
        b.label.reset();
        CHECK_THROWS_AS(validate(b), ValidationError);
        Instance g = make_instance("g");
        g.label = Clarity::clear;
        CHECK_THROWS_AS(validate(g), ValidationError);
    }
}

TEST_CASE("verdict validation against an instance") {
    Instance i = make_instance("q");
    JudgeVerdict v;
    v.missing_checkpoints = {i.checkpoints[0].text};
    CHECK_NOTHROW(validate(v, i));
    v.all_resolved = true;
    CHECK_THROWS_AS(validate(v, i), ValidationError);
    v.all_resolved = false;
    v.correctness = Correctness::correct;
    CHECK_THROWS_AS(validate(v, i), ValidationError);
    v.correctness = Correctness::undetermined;
    v.targeted_checkpoints = std::vector<std::string>{"not on the rubric"};
    CHECK_THROWS_AS(validate(v, i), ValidationError);
}

TEST_CASE("trace validation") {
    DialogueTrace t;
    t.instance_id = "x";
    t.turns = {{1, Role::user, "q"}, {2, Role::assistant, "a"}};
    t.outcome = Outcome::correct;
    CHECK_THROWS_AS(validate(t), ValidationError);  // no verdict for the assistant turn
    t.verdicts.push_back({});
    CHECK_NOTHROW(validate(t));
    t.outcome = Outcome::skipped;
    CHECK_THROWS_AS(validate(t), ValidationError);  // skip without cause
    t.skip_cause = "judge";
    t.verdicts.clear();
    CHECK_NOTHROW(validate(t));

    t.turns = {{1, Role::assistant, "a"}};
    CHECK_THROWS_AS(validate(t), ValidationError);
    t.turns = {{2, Role::user, "q"}, {2, Role::assistant, "a"}};
    CHECK_THROWS_AS(validate(t), ValidationError);
}

TEST_CASE("duplicate ids are rejected") {
    std::vector<QAPair> pairs = {{"a", "d", "q", "x"}, {"b", "d", "q", "x"}};
    CHECK_NOTHROW(validate_unique_ids(pairs));
    pairs.push_back({"a", "e", "q2", "y"});
    CHECK_THROWS_AS(validate_unique_ids(pairs), ValidationError);
}

TEST_CASE("derived seeds are stable FNV-1a values") {
    // Reference computed byte by byte.
    auto fnv = [](std::uint64_t seed, std::string_view id) {
        std::uint64_t h = 14695981039346656037ULL;
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((seed >> (8 * i)) & 0xff);
        for (unsigned char b : bytes) h = (h ^ b) * 1099511628211ULL;
        for (char c : id) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
        return h;
    };
    CHECK(derive_seed(0, "") == fnv(0, ""));
    CHECK(derive_seed(42, "item-7") == fnv(42, "item-7"));
    CHECK(derive_seed(42, "item-7") != derive_seed(43, "item-7"));
    CHECK(derive_seed(42, "item-7") != derive_seed(42, "item-8"));
}
