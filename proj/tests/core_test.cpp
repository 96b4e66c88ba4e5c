// Core model tests: schema validation, typechecking, the oracle evaluator,
// schema mappings with their name correspondences, and the JSON codec.

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "mmw/core/eval.hpp"
#include "mmw/core/json_codec.hpp"
#include "mmw/core/mapping.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/result.hpp"
#include "mmw/core/schema.hpp"

using namespace mmw;

namespace {

CanonicalSchema people_schema() {
  CanonicalSchema s;
  s.name = "people_lcs";
  s.role = SchemaRole::LCS;
  s.provenance = {"src"};
  s.relations.push_back(RelationDef{
      "persons",
      {{"pid", "integer", false}, {"name", "string", true}, {"age", "integer", true},
       {"height", "float", true}, {"member", "boolean", true}}});
  return s;
}

RelationData people_data() {
  RelationData d;
  d.schema = people_schema().relations[0];
  d.rows = {
      {Value(1), Value("ada"), Value(36), Value(1.7), Value(true)},
      {Value(2), Value("bo"), Value(17), Value{}, Value(false)},
      {Value(3), Value{}, Value(64), Value(1.55), Value(true)},
      {Value(4), Value("cleo"), Value{}, Value(1.6), Value{}},
  };
  return d;
}

bool has_violation(const std::vector<Violation>& vs, const std::string& code) {
  for (const auto& v : vs)
    if (v.code == code) return true;
  return false;
}

bool has_type_error(const TypecheckResult& tc, const std::string& code) {
  for (const auto& e : tc.errors)
    if (e.code == code) return true;
  return false;
}

}  // namespace

// --- validate_schema ---------------------------------------------------------

TEST(ValidateSchema, AcceptsWellFormedSchema) {
  EXPECT_TRUE(validate_schema(people_schema()).empty());
}

TEST(ValidateSchema, FlagsDuplicatesEmptyNamesAndUnknownTypes) {
  CanonicalSchema s = people_schema();
  s.relations.push_back(s.relations[0]);                              // duplicate relation
  s.relations[0].attributes.push_back({"pid", "integer", true});     // duplicate attribute
  s.relations[0].attributes.push_back({"", "integer", true});        // empty attribute name
  s.relations[0].attributes.push_back({"blob", "varchar", true});    // unknown type
  auto vs = validate_schema(s);
  EXPECT_TRUE(has_violation(vs, "duplicate-relation"));
  EXPECT_TRUE(has_violation(vs, "duplicate-attribute"));
  EXPECT_TRUE(has_violation(vs, "empty-name"));
  EXPECT_TRUE(has_violation(vs, "unknown-type"));
}

TEST(ValidateSchema, RequiresProvenanceAboveLis) {
  CanonicalSchema s = people_schema();
  s.provenance.clear();
  EXPECT_TRUE(has_violation(validate_schema(s), "missing-provenance"));
  s.role = SchemaRole::LIS;
  EXPECT_FALSE(has_violation(validate_schema(s), "missing-provenance"));
}

// --- typecheck_query ---------------------------------------------------------

TEST(Typecheck, AcceptsValidQueryAndWidensIntegerLiterals) {
  CanonicalQuery q;
  q.target = "persons";
  q.projection = {"name", "height"};
  q.selection = Predicate::compare("height", CmpOp::Gte, Value(1));  // int vs float column
  TypecheckResult tc = typecheck_query(q, people_schema());
  ASSERT_TRUE(tc.ok());
  EXPECT_TRUE(tc.query->selection->literal.is_float());
  EXPECT_DOUBLE_EQ(tc.query->selection->literal.as_float(), 1.0);
}

TEST(Typecheck, UnknownRelation) {
  CanonicalQuery q;
  q.target = "nobody";
  TypecheckResult tc = typecheck_query(q, people_schema());
  EXPECT_FALSE(tc.ok());
  EXPECT_TRUE(has_type_error(tc, "unknown-relation"));
}

TEST(Typecheck, UnknownAttributeInProjectionAndSelection) {
  CanonicalQuery q;
  q.target = "persons";
  q.projection = {"salary"};
  q.selection = Predicate::compare("badge", CmpOp::Eq, Value(1));
  TypecheckResult tc = typecheck_query(q, people_schema());
  EXPECT_FALSE(tc.ok());
  EXPECT_TRUE(has_type_error(tc, "unknown-attribute"));
}

TEST(Typecheck, TypeMismatchAndNullLiteral) {
  CanonicalQuery q;
  q.target = "persons";
  q.selection = Predicate::compare("age", CmpOp::Eq, Value("old"));
  EXPECT_TRUE(has_type_error(typecheck_query(q, people_schema()), "type-mismatch"));
  q.selection = Predicate::compare("age", CmpOp::Eq, Value{});
  EXPECT_TRUE(has_type_error(typecheck_query(q, people_schema()), "type-mismatch"));
}

TEST(Typecheck, OperatorRestrictions) {
  CanonicalQuery q;
  q.target = "persons";
  q.selection = Predicate::compare("age", CmpOp::Like, Value("4%"));
  EXPECT_TRUE(
      has_type_error(typecheck_query(q, people_schema()), "operator-unsupported-for-type"));
  q.selection = Predicate::compare("member", CmpOp::Lt, Value(true));
  EXPECT_TRUE(
      has_type_error(typecheck_query(q, people_schema()), "operator-unsupported-for-type"));
  q.selection = Predicate::compare("member", CmpOp::Neq, Value(true));
  EXPECT_TRUE(typecheck_query(q, people_schema()).ok());
}

TEST(Typecheck, PredicateDepthCap) {
  Predicate p = Predicate::compare("age", CmpOp::Eq, Value(1));
  for (int i = 0; i < kMaxPredicateDepth; ++i) p = Predicate::not_(std::move(p));
  CanonicalQuery q;
  q.target = "persons";
  q.selection = std::move(p);
  EXPECT_TRUE(has_type_error(typecheck_query(q, people_schema()), "predicate-too-deep"));
}

// --- oracle evaluator --------------------------------------------------------

TEST(Oracle, LikeMatchSemantics) {
  EXPECT_TRUE(detail::like_match("hello", "hello"));
  EXPECT_TRUE(detail::like_match("hello", "h%"));
  EXPECT_TRUE(detail::like_match("hello", "%llo"));
  EXPECT_TRUE(detail::like_match("hello", "h_llo"));
  EXPECT_TRUE(detail::like_match("hello", "%%l%"));
  EXPECT_TRUE(detail::like_match("", "%"));
  EXPECT_FALSE(detail::like_match("hello", "H%"));  // case-sensitive
  EXPECT_FALSE(detail::like_match("hello", "hell"));
  EXPECT_FALSE(detail::like_match("hello", "_"));
}

TEST(Oracle, ComparisonWithNullIsFalseEvenUnderNot) {
  RelationData d = people_data();
  CanonicalQuery q;
  q.target = "persons";
  q.projection = {"pid"};
  q.selection = Predicate::compare("age", CmpOp::Gte, Value(0));
  // Row 4 has null age: excluded.
  EXPECT_EQ(evaluate_query_oracle(q, d).rows.size(), 3u);
  // NOT is two-valued: null age rows stay excluded by the inner compare, so
  // NOT flips them to included.
  q.selection = Predicate::not_(Predicate::compare("age", CmpOp::Gte, Value(0)));
  ASSERT_EQ(evaluate_query_oracle(q, d).rows.size(), 1u);
  EXPECT_EQ(evaluate_query_oracle(q, d).rows[0][0], Value(4));
}

TEST(Oracle, ProjectionOrderAndLimitPreserveSourceOrder) {
  RelationData d = people_data();
  CanonicalQuery q;
  q.target = "persons";
  q.projection = {"name", "pid"};
  q.limit = 2;
  CanonicalResult r = evaluate_query_oracle(q, d);
  ASSERT_EQ(r.attributes.size(), 2u);
  EXPECT_EQ(r.attributes[0].name, "name");
  EXPECT_EQ(r.attributes[1].name, "pid");
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0][1], Value(1));
  EXPECT_EQ(r.rows[1][1], Value(2));
}

TEST(Oracle, EmptyProjectionMeansAllAttributes) {
  RelationData d = people_data();
  CanonicalQuery q;
  q.target = "persons";
  CanonicalResult r = evaluate_query_oracle(q, d);
  EXPECT_EQ(r.attributes.size(), d.schema.attributes.size());
  EXPECT_EQ(r.rows.size(), d.rows.size());
}

// --- schema mappings ---------------------------------------------------------

TEST(Mapping, RenameAndHideTrackCorrespondence) {
  SchemaMapping m;
  m.rules = {MappingRule::rename_relation("persons", "people"),
             MappingRule::rename_attribute("people", "age", "years"),
             MappingRule::hide_attribute("people", "member")};
  MappedSchema out = apply_schema_mapping(people_schema(), m);
  const RelationDef* rel = out.schema.find_relation("people");
  ASSERT_NE(rel, nullptr);
  EXPECT_EQ(out.schema.find_relation("persons"), nullptr);
  EXPECT_NE(rel->find_attribute("years"), nullptr);
  EXPECT_EQ(rel->find_attribute("member"), nullptr);
  const RelBinding* b = out.correspondence.find("people");
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->bases[0].relation, "persons");
  ASSERT_NE(b->bases[0].native_attr("years"), nullptr);
  EXPECT_EQ(*b->bases[0].native_attr("years"), "age");
  EXPECT_EQ(b->bases[0].native_attr("member"), nullptr);
}

TEST(Mapping, HideRelationRemovesBinding) {
  SchemaMapping m;
  m.rules = {MappingRule::hide_relation("persons")};
  MappedSchema out = apply_schema_mapping(people_schema(), m);
  EXPECT_TRUE(out.schema.relations.empty());
  EXPECT_EQ(out.correspondence.find("persons"), nullptr);
}

TEST(Mapping, DanglingReferencesAndCollisions) {
  SchemaMapping m;
  m.rules = {MappingRule::rename_relation("ghost", "g")};
  EXPECT_THROW(
      {
        try {
          apply_schema_mapping(people_schema(), m);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), "dangling-name-reference");
          throw;
        }
      },
      Error);

  CanonicalSchema two = people_schema();
  two.relations.push_back(RelationDef{"pets", {{"pid", "integer", false}}});
  m.rules = {MappingRule::rename_relation("persons", "pets")};
  EXPECT_THROW(
      {
        try {
          apply_schema_mapping(two, m);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), "name-collision");
          throw;
        }
      },
      Error);

  m.rules = {MappingRule::rename_attribute("persons", "age", "name")};
  EXPECT_THROW(
      {
        try {
          apply_schema_mapping(people_schema(), m);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), "name-collision");
          throw;
        }
      },
      Error);
}

TEST(Mapping, UnionRequiresIdenticalAttributeLists) {
  CanonicalSchema s = people_schema();
  s.relations.push_back(RelationDef{"persons2", s.relations[0].attributes});
  SchemaMapping ok;
  ok.rules = {MappingRule::union_relations({"persons", "persons2"}, "all")};
  MappedSchema out = apply_schema_mapping(s, ok);
  EXPECT_NE(out.schema.find_relation("all"), nullptr);
  EXPECT_EQ(out.schema.find_relation("persons"), nullptr);  // union consumes sources
  EXPECT_EQ(out.schema.find_relation("persons2"), nullptr);
  ASSERT_NE(out.correspondence.find("all"), nullptr);
  EXPECT_EQ(out.correspondence.find("all")->kind, RelBinding::Kind::Union);
  EXPECT_EQ(out.correspondence.find("all")->bases.size(), 2u);

  s.relations[1].attributes[2].type = "string";  // break type compatibility
  EXPECT_THROW(
      {
        try {
          apply_schema_mapping(s, ok);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), "union-incompatible-sources");
          throw;
        }
      },
      Error);
}

TEST(Mapping, JoinViewKeepsInputsAndRejectsCollisionsAndKeyHides) {
  CanonicalSchema s = people_schema();
  s.relations.push_back(
      RelationDef{"teams", {{"tid", "integer", false}, {"captain", "integer", true}}});
  SchemaMapping m;
  m.rules = {MappingRule::join_view("persons", "pid", "teams", "captain", "roster")};
  MappedSchema out = apply_schema_mapping(s, m);
  EXPECT_NE(out.schema.find_relation("roster"), nullptr);
  EXPECT_NE(out.schema.find_relation("persons"), nullptr);  // join keeps inputs visible
  EXPECT_NE(out.schema.find_relation("teams"), nullptr);
  ASSERT_NE(out.correspondence.find("roster"), nullptr);
  EXPECT_EQ(out.correspondence.find("roster")->kind, RelBinding::Kind::Join);
  EXPECT_EQ(out.correspondence.find("roster")->left_key, "pid");
  EXPECT_EQ(out.correspondence.find("roster")->right_key, "captain");

  // Key type mismatch.
  m.rules = {MappingRule::join_view("persons", "name", "teams", "captain", "bad")};
  EXPECT_THROW(
      {
        try {
          apply_schema_mapping(s, m);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), "join-incompatible");
          throw;
        }
      },
      Error);

  // Attribute name collision across the two sides.
  CanonicalSchema clash = s;
  clash.relations[1].attributes.push_back({"name", "string", true});
  m.rules = {MappingRule::join_view("persons", "pid", "teams", "captain", "bad")};
  EXPECT_THROW(apply_schema_mapping(clash, m), Error);

  // Hiding the join key of an existing view is rejected.
  m.rules = {MappingRule::join_view("persons", "pid", "teams", "captain", "roster"),
             MappingRule::hide_attribute("roster", "pid")};
  EXPECT_THROW(
      {
        try {
          apply_schema_mapping(s, m);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), "join-incompatible");
          throw;
        }
      },
      Error);
}

TEST(Mapping, ReverseTranslateAndForwardTranslateRoundTrip) {
  SchemaMapping m;
  m.rules = {MappingRule::rename_relation("persons", "people"),
             MappingRule::rename_attribute("people", "name", "full_name")};
  MappedSchema out = apply_schema_mapping(people_schema(), m);
  const BaseBinding& base = out.correspondence.find("people")->bases[0];

  CanonicalQuery q;
  q.target = "people";
  q.projection = {"full_name", "age"};
  q.selection = Predicate::and_({Predicate::compare("full_name", CmpOp::Like, Value("a%")),
                                 Predicate::compare("age", CmpOp::Gte, Value(18))});
  CanonicalQuery native = reverse_translate_query(q, base);
  EXPECT_EQ(native.target, "persons");
  EXPECT_EQ(native.projection, (std::vector<std::string>{"name", "age"}));
  EXPECT_EQ(native.selection->children[0].attribute, "name");

  CanonicalResult native_result = evaluate_query_oracle(native, people_data());
  CanonicalResult visible = forward_translate_result(native_result, base);
  ASSERT_EQ(visible.attributes.size(), 2u);
  EXPECT_EQ(visible.attributes[0].name, "full_name");
  EXPECT_EQ(visible.rows, native_result.rows);

  // A hidden attribute cannot be named on the way back out.
  m.rules.push_back(MappingRule::hide_attribute("people", "age"));
  MappedSchema hidden = apply_schema_mapping(people_schema(), m);
  EXPECT_THROW(
      forward_translate_result(native_result, hidden.correspondence.find("people")->bases[0]),
      Error);
}

// --- JSON codec --------------------------------------------------------------

TEST(JsonCodec, SchemaQueryResultRoundTrip) {
  mmwtest::Rng rng(101);
  for (int i = 0; i < 50; ++i) {
    CanonicalSchema s;
    s.name = "s" + std::to_string(i);
    s.role = SchemaRole::GCS;
    s.provenance = {"a", "b"};
    s.relations.push_back(mmwtest::random_relation(rng, "r" + std::to_string(i)));
    EXPECT_EQ(schema_from_json(schema_to_json(s)), s);

    RelationData data{s.relations[0], mmwtest::random_rows(rng, s.relations[0], 10)};
    CanonicalQuery q = mmwtest::random_query(rng, data.schema, data.rows);
    EXPECT_EQ(query_from_json(query_to_json(q)), q);

    // The oracle requires a typechecked query (literal coercion).
    TypecheckResult tc = typecheck_query(q, CanonicalSchema{"t", SchemaRole::LIS, {data.schema}, {}});
    ASSERT_TRUE(tc.ok()) << tc.errors[0].code;
    CanonicalResult r = evaluate_query_oracle(*tc.query, data, "codec");
    CanonicalResult back = result_from_json(result_to_json(r));
    EXPECT_TRUE(mmwtest::results_equal(r, back))
        << mmwtest::describe_result(r) << "\nvs\n"
        << mmwtest::describe_result(back);
    EXPECT_EQ(back.origin, "codec");
  }
}

TEST(JsonCodec, MappingRoundTripAndErrors) {
  SchemaMapping m;
  m.rules = {MappingRule::rename_relation("a", "b"),
             MappingRule::rename_attribute("b", "x", "y"),
             MappingRule::hide_relation("c"),
             MappingRule::hide_attribute("b", "z"),
             MappingRule::union_relations({"u", "v"}, "w"),
             MappingRule::join_view("l", "lk", "r", "rk", "j")};
  SchemaMapping back = mapping_from_json(mapping_to_json(m));
  ASSERT_EQ(back.rules.size(), m.rules.size());
  for (std::size_t i = 0; i < m.rules.size(); ++i) {
    EXPECT_EQ(back.rules[i].kind, m.rules[i].kind);
    EXPECT_EQ(back.rules[i].relation, m.rules[i].relation);
    EXPECT_EQ(back.rules[i].target, m.rules[i].target);
  }
  EXPECT_THROW(mapping_from_json(json::parse(R"([{"rule":"teleport"}])")), Error);
  EXPECT_THROW(query_from_json(json::parse(R"({"projection":[]})")), Error);
}
