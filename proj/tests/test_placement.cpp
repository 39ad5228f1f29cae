#include <doctest.h>

#include "sgsim/placement.hpp"
#include "sgsim/runtime.hpp"

using namespace sgsim;

namespace {

const char* kSampleNetwork = R"(
# two clusters, three hosts
cluster east
  host h1
    node n1 ram_gb=64 cpu_score=9.5 labels=gpu,fast
    node n2 ram_gb=32 cpu_score=4
  host h2
    node n3 ram_gb=16 cpu_score=2
cluster west
  host h3
    node n4 ram_gb=128 cpu_score=7
)";

}  // namespace

TEST_CASE("network description parses attributes and hierarchy") {
  NetworkDescription nd = NetworkDescription::parse(kSampleNetwork);
  CHECK(nd.attrs.static_attrs.size() == 4);
  CHECK(nd.attrs.static_attrs.at("n1").num.at("ram_gb") == 64);
  CHECK(nd.attrs.static_attrs.at("n1").labels.count("gpu") == 1);
  CHECK(nd.distances.locations.at("n3").cluster == "east");
}

TEST_CASE("malformed descriptions report the offending line") {
  CHECK_THROWS_WITH_AS(NetworkDescription::parse("node n1\n"),
                       "line 1: node outside a host", ParseError);
  CHECK_THROWS_WITH_AS(
      NetworkDescription::parse("cluster c\nhost h\nnode n1 ram=abc\n"),
      "line 3: bad numeric value for ram: abc", ParseError);
  try {
    NetworkDescription::parse("cluster c\nbogus x\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("communication distance follows the level metric") {
  NetworkDescription nd = NetworkDescription::parse(kSampleNetwork);
  const auto& d = nd.distances;
  CHECK(d.dist("n1", "n1") == 0);  // same node
  CHECK(d.dist("n1", "n2") == 1);  // same host
  CHECK(d.dist("n1", "n3") == 2);  // same cluster, different host
  CHECK(d.dist("n1", "n4") == 3);  // different clusters
  // Symmetry.
  for (const auto& a : NodeSet{"n1", "n2", "n3", "n4"})
    for (const auto& b : NodeSet{"n1", "n2", "n3", "n4"})
      CHECK(d.dist(a, b) == d.dist(b, a));
}

TEST_CASE("choose_node applies hard predicates then the weighted score") {
  NetworkDescription nd = NetworkDescription::parse(kSampleNetwork);

  PlacementQuery q;
  q.require.push_back({"ram_gb", Predicate::Kind::ge, 100, ""});
  // Only one candidate qualifies.
  CHECK(choose_node(nullptr, nd.attrs, nd.distances, q) == NodeId("n4"));

  // Minimise distance to n1: the co-hosted node wins.
  PlacementQuery near;
  near.near = "n1";
  near.near_weight = 1.0;
  near.require.push_back({"ram_gb", Predicate::Kind::ge, 20, ""});
  // Candidates: n1 (excluded? no - it qualifies too and has dist 0).
  CHECK(choose_node(nullptr, nd.attrs, nd.distances, near) == NodeId("n1"));

  // Contradictory predicates leave no candidate.
  PlacementQuery none;
  none.require.push_back({"ram_gb", Predicate::Kind::ge, 100, ""});
  none.require.push_back({"ram_gb", Predicate::Kind::le, 20, ""});
  CHECK(!choose_node(nullptr, nd.attrs, nd.distances, none).has_value());

  // Label predicate.
  PlacementQuery gpu;
  gpu.require.push_back({"", Predicate::Kind::has_label, 0, "gpu"});
  CHECK(choose_node(nullptr, nd.attrs, nd.distances, gpu) == NodeId("n1"));
}

TEST_CASE("choose_node is a pure function with a deterministic tie-break") {
  NetworkDescription nd = NetworkDescription::parse(kSampleNetwork);
  PlacementQuery q;  // no predicates, no weights: pure tie
  auto first = choose_node(nullptr, nd.attrs, nd.distances, q);
  for (int i = 0; i < 5; ++i)
    CHECK(choose_node(nullptr, nd.attrs, nd.distances, q) == first);
  CHECK(first == NodeId("n1"));  // smallest id wins ties
}

TEST_CASE("scaling all weights by a positive constant keeps the argmax") {
  NetworkDescription nd = NetworkDescription::parse(kSampleNetwork);
  PlacementQuery q;
  q.prefer.push_back({"ram_gb", 1.0});
  q.prefer.push_back({"cpu_score", 2.0});
  q.near = "n3";
  q.near_weight = 0.5;
  auto base = choose_node(nullptr, nd.attrs, nd.distances, q);
  for (double scale : {0.25, 3.0, 117.0}) {
    PlacementQuery scaled = q;
    for (auto& t : scaled.prefer) t.weight *= scale;
    scaled.near_weight *= scale;
    CHECK(choose_node(nullptr, nd.attrs, nd.distances, scaled) == base);
  }
}

TEST_CASE("dynamic attributes are recomputed from the world on each query") {
  BootSpec boot;
  boot.nodes.push_back({"n1", NodeType::normal, {}, {}});
  boot.nodes.push_back({"n2", NodeType::normal, {}, {}});
  SimWorld w(boot);
  struct Idle : Behaviour {};
  w.spawn("n1", {"p", [] { return std::make_unique<Idle>(); }});
  w.spawn("n1", {"p", [] { return std::make_unique<Idle>(); }});
  w.spawn("n2", {"p", [] { return std::make_unique<Idle>(); }});
  w.run_until(1);

  AttributeSet attrs;
  DistanceSpec dist;
  CHECK(attribute_of(&w, attrs, "n1", "process_count") == 2.0);
  CHECK(attribute_of(&w, attrs, "n2", "load") == 1.0);

  // Prefer the least loaded node; it changes as the world changes.
  PlacementQuery q;
  q.prefer.push_back({"load", -1.0});
  CHECK(choose_node(&w, attrs, dist, q) == NodeId("n2"));
  w.spawn("n2", {"p", [] { return std::make_unique<Idle>(); }});
  w.spawn("n2", {"p", [] { return std::make_unique<Idle>(); }});
  w.run_until(w.now() + 1);
  CHECK(choose_node(&w, attrs, dist, q) == NodeId("n1"));
}
