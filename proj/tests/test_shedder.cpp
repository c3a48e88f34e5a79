#include "frameshed/shedder.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "frameshed/errors.hpp"
#include "frameshed/rng.hpp"
#include "reference_shedder.hpp"

using namespace frameshed;

namespace {

LoadShedder::IngressFrame frame(std::int64_t id, double utility,
                                double arrival = 0.0,
                                double deadline = 1e18) {
  return {id, 0, arrival, deadline, utility};
}

}  // namespace

TEST_CASE("fast path dispatches immediately when a token is available") {
  LoadShedder shedder({4, 1});
  shedder.set_threshold(Threshold::at(0.5));
  auto dispatched = shedder.on_frame(frame(1, 0.9), 0.0);
  REQUIRE(dispatched.size() == 1);
  CHECK(dispatched[0].frame_id == 1);
  CHECK(shedder.tokens() == 0);
  CHECK(shedder.queue_size() == 0);
  CHECK(shedder.stats().forwarded == 1);
}

TEST_CASE("utility at or below the threshold is shed at admission") {
  LoadShedder shedder({4, 1});
  shedder.set_threshold(Threshold::at(0.5));
  CHECK(shedder.on_frame(frame(1, 0.3), 0.0).empty());
  CHECK(shedder.on_frame(frame(2, 0.5), 0.0).empty());  // <= semantics
  CHECK(shedder.stats().shed_threshold == 2);
  REQUIRE(shedder.events().size() == 2);
  CHECK(shedder.events()[0].decision == ShedDecision::kShedThreshold);
  CHECK(shedder.events()[0].threshold == 0.5);
}

TEST_CASE("full queue evicts the lowest-utility frame") {
  LoadShedder shedder({3, 1});
  // Occupy the token so frames stay queued.
  shedder.on_frame(frame(0, 0.99), 0.0);
  for (auto [id, u] : {std::pair<int, double>{1, 0.6}, {2, 0.7}, {3, 0.8}}) {
    CHECK(shedder.on_frame(frame(id, u), 1.0).empty());
  }
  REQUIRE(shedder.queue_size() == 3);

  SUBCASE("a better frame displaces the resident minimum") {
    CHECK(shedder.on_frame(frame(4, 0.65), 2.0).empty());
    CHECK(shedder.queue_size() == 3);
    CHECK(shedder.stats().shed_queue_eviction == 1);
    const auto& ev = shedder.events().back();
    CHECK(ev.frame_id == 1);  // the 0.6 resident
    CHECK(ev.decision == ShedDecision::kShedQueueEviction);
  }

  SUBCASE("a worse frame is evicted immediately") {
    CHECK(shedder.on_frame(frame(4, 0.5), 2.0).empty());
    CHECK(shedder.queue_size() == 3);
    const auto& ev = shedder.events().back();
    CHECK(ev.frame_id == 4);
    CHECK(ev.decision == ShedDecision::kShedQueueEviction);
  }
}

TEST_CASE("token freed dispatches the highest-utility frame, oldest on ties") {
  LoadShedder shedder({8, 1});
  shedder.on_frame(frame(0, 0.99), 0.0);  // consume the token
  shedder.on_frame(frame(1, 0.4), 1.0);
  shedder.on_frame(frame(2, 0.9), 2.0);
  shedder.on_frame(frame(3, 0.7), 3.0);
  auto dispatched = shedder.on_token_freed(10.0);
  REQUIRE(dispatched.size() == 1);
  CHECK(dispatched[0].frame_id == 2);

  SUBCASE("empty queue retains the token") {
    LoadShedder idle({4, 1});
    idle.on_frame(frame(9, 0.5), 0.0);
    CHECK(idle.on_token_freed(1.0).empty());
    CHECK(idle.tokens() == 1);
    auto out = idle.on_frame(frame(10, 0.5), 2.0);
    REQUIRE(out.size() == 1);  // token was banked, frame goes straight out
  }

  SUBCASE("equal utilities dispatch oldest first") {
    LoadShedder tie({4, 1});
    tie.on_frame(frame(0, 0.99), 0.0);
    tie.on_frame(frame(1, 0.7), 1.0);
    tie.on_frame(frame(2, 0.7), 2.0);
    auto d = tie.on_token_freed(3.0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].frame_id == 1);
  }
}

TEST_CASE("resize evicts lowest utilities first") {
  LoadShedder shedder({3, 1});
  shedder.on_frame(frame(0, 0.99), 0.0);
  shedder.on_frame(frame(1, 0.2), 1.0);
  shedder.on_frame(frame(2, 0.5), 2.0);
  shedder.on_frame(frame(3, 0.9), 3.0);
  REQUIRE(shedder.queue_size() == 3);

  auto evicted = shedder.resize_queue(1, 4.0);
  REQUIRE(evicted.size() == 2);
  CHECK(evicted[0].frame_id == 1);
  CHECK(evicted[1].frame_id == 2);
  CHECK(shedder.queue_size() == 1);
  CHECK(shedder.stats().shed_resize == 2);

  CHECK(shedder.resize_queue(5, 5.0).empty());  // growing evicts nothing
  CHECK(shedder.resize_queue(5, 6.0).empty());  // same size is a no-op

  shedder.resize_queue(0, 7.0);  // clamped
  CHECK(shedder.capacity() == 1);
  CHECK(shedder.stats().resize_clamped == 1);
}

TEST_CASE("malformed utilities are rejected with a distinct count") {
  LoadShedder shedder({4, 1});
  CHECK(shedder.on_frame(frame(1, std::nan("")), 0.0).empty());
  CHECK(shedder.on_frame(frame(2, -0.1), 0.0).empty());
  CHECK(shedder.on_frame(frame(3, 1.5), 0.0).empty());
  CHECK(shedder.stats().rejected == 3);
  CHECK(shedder.stats().ingress == 3);
  CHECK(shedder.events().empty());
}

TEST_CASE("expired frames are shed at dispatch time") {
  LoadShedder shedder({4, 1});
  shedder.on_frame(frame(0, 0.99, 0.0), 0.0);
  shedder.on_frame(frame(1, 0.8, 1.0, /*deadline=*/100.0), 1.0);
  shedder.on_frame(frame(2, 0.6, 2.0, /*deadline=*/500.0), 2.0);
  auto dispatched = shedder.on_token_freed(200.0);  // frame 1 already expired
  REQUIRE(dispatched.size() == 1);
  CHECK(dispatched[0].frame_id == 2);
  CHECK(shedder.stats().shed_deadline == 1);

  SUBCASE("dispatch guard accounts for downstream cost") {
    LoadShedder guarded({4, 1});
    guarded.set_dispatch_cost_ms(300.0);
    guarded.on_frame(frame(0, 0.99, 0.0), 0.0);
    guarded.on_frame(frame(1, 0.8, 1.0, /*deadline=*/400.0), 1.0);
    CHECK(guarded.on_token_freed(150.0).empty());  // 150+300 > 400
    CHECK(guarded.stats().shed_deadline == 1);
  }
}

TEST_CASE("starvation guard: the backend is never idle while frames queue") {
  LoadShedder shedder({1, 1});
  int in_flight = 0;
  Rng rng(55);
  for (int step = 0; step < 500; ++step) {
    if (rng.bernoulli(0.6)) {
      auto d = shedder.on_frame(frame(step, rng.uniform()), step);
      in_flight += static_cast<int>(d.size());
    } else if (in_flight > 0) {
      --in_flight;
      auto d = shedder.on_token_freed(step);
      in_flight += static_cast<int>(d.size());
    }
    // With capacity 1 and a free token, anything queued must dispatch.
    if (in_flight == 0) CHECK(shedder.queue_size() == 0);
  }
}

TEST_CASE("randomized traces match the re-sort reference implementation") {
  Rng rng(987654);
  for (int trace = 0; trace < 500; ++trace) {
    const std::size_t cap = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const int max_tokens = static_cast<int>(rng.uniform_int(1, 3));
    LoadShedder shedder({cap, max_tokens});
    frameshed::testing::ReferenceShedder reference(cap, max_tokens);

    int in_flight = 0;
    std::int64_t next_id = 0;
    std::int64_t tokens_freed = 0;
    const int events = static_cast<int>(rng.uniform_int(1, 50));
    std::size_t event_cursor = 0;

    auto check_outcomes =
        [&](const std::vector<FrameTicket>& dispatched,
            const std::vector<std::pair<std::int64_t, std::string>>& expected) {
          // Compare the full sealed-decision streams.
          for (const auto& [id, kind] : expected) {
            REQUIRE(event_cursor < shedder.events().size());
            const auto& ev = shedder.events()[event_cursor++];
            CHECK(ev.frame_id == id);
            CHECK(std::string(to_string(ev.decision)) == kind);
          }
          CHECK(event_cursor == shedder.events().size());
          std::size_t forwarded = 0;
          for (const auto& [id, kind] : expected) {
            if (kind == "forwarded") {
              REQUIRE(forwarded < dispatched.size());
              CHECK(dispatched[forwarded++].frame_id == id);
            }
          }
          CHECK(forwarded == dispatched.size());
          in_flight += static_cast<int>(dispatched.size());
        };

    for (int step = 0; step < events; ++step) {
      const double now = step;
      const int action = static_cast<int>(rng.uniform_int(0, 9));
      if (action < 5) {
        const double utility = rng.uniform_int(0, 10) / 10.0;  // force ties
        const double deadline =
            rng.bernoulli(0.3) ? now + rng.uniform(0.0, 10.0) : 1e18;
        auto f = frame(next_id++, utility, now, deadline);
        check_outcomes(shedder.on_frame(f, now), reference.on_frame(f, now));
      } else if (action < 7 && in_flight > 0) {
        --in_flight;
        ++tokens_freed;
        check_outcomes(shedder.on_token_freed(now), reference.on_token(now));
      } else if (action == 7) {
        const auto cap2 = static_cast<std::size_t>(rng.uniform_int(1, 6));
        auto evicted = shedder.resize_queue(cap2, now);
        auto expected = reference.resize(cap2, now);
        REQUIRE(evicted.size() == expected.size());
        for (std::size_t k = 0; k < evicted.size(); ++k) {
          CHECK(evicted[k].frame_id == expected[k].first);
          CHECK(expected[k].second == "shed_resize");
        }
        event_cursor = shedder.events().size();
      } else if (action == 8) {
        const auto th = rng.bernoulli(0.3)
                            ? Threshold::shed_none()
                            : Threshold::at(rng.uniform_int(0, 10) / 10.0);
        shedder.set_threshold(th);
        reference.set_threshold(th.value);
      } else {
        const double cost = rng.uniform(0.0, 5.0);
        shedder.set_dispatch_cost_ms(cost);
        reference.set_dispatch_cost(cost);
      }
      CHECK(shedder.queue_size() == reference.queue_size());
      CHECK(shedder.tokens() == reference.tokens());
      CHECK(shedder.queue_size() <= shedder.capacity());

      // Conservation: every ingress frame is accounted for exactly once.
      const auto& st = shedder.stats();
      CHECK(st.ingress == st.forwarded + st.total_shed() + st.rejected +
                              static_cast<std::int64_t>(shedder.queue_size()));
      // No dispatch without a token.
      CHECK(st.forwarded <= max_tokens + tokens_freed);
    }
  }
}

TEST_CASE("forwarded never exceeds initial tokens plus completions") {
  Rng rng(24);
  LoadShedder shedder({3, 2});
  std::int64_t completions = 0;
  int in_flight = 0;
  for (int step = 0; step < 300; ++step) {
    if (rng.bernoulli(0.7)) {
      in_flight += static_cast<int>(
          shedder.on_frame(frame(step, rng.uniform()), step).size());
    } else if (in_flight > 0) {
      --in_flight;
      ++completions;
      in_flight += static_cast<int>(shedder.on_token_freed(step).size());
    }
    CHECK(shedder.stats().forwarded <= 2 + completions);
  }
}
