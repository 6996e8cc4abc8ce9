#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "evsched/params.hpp"
#include "evsched/station.hpp"

namespace evsched::stoch {

// Deterministic RNG with hand-rolled distributions so that draw counts per
// event are fixed and streams stay aligned when only decisions change.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    double uniform();                 // [0, 1)
    int    uniform_int(int lo, int hi);  // inclusive bounds
    double gaussian();                // standard normal, Box-Muller (2 uniforms)
    int    poisson(double lambda);    // Knuth; consumes count+1 uniforms

  private:
    std::uint64_t next_u64();
    std::uint64_t state_;
};

// Derives independent substream seeds from a master seed and up to four tags.
std::uint64_t substream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0, std::uint64_t d = 0);

// Stream tags keep unrelated draws out of each other's sequences.
enum class StreamTag : std::uint64_t {
    DayExogenous = 1,
    SamplePath = 2,
    Exploration = 3,
    Diagnostics = 4,
};

int sample_arrival_count(Rng& rng, double lambda);

// Parking stages uniform on {1..max}; energy uniform on the request grid
// (multiples of stage energy / divisor) up to a full-stay charge.
env::EVRequest sample_ev_request(Rng& rng, const StationParams& p);

// One arrival with its acceptance lottery attached. Consumes exactly three
// uniforms so streams line up across different posted prices.
env::ArrivalDraw sample_arrival_draw(Rng& rng, const StationParams& p);

// Normal noise around the forecast, relative sigma, clamped to [0, cap].
double sample_renewable(Rng& rng, double predicted_kw, double noise_frac, double cap_kw);

// Forecast renewable powers for a stage, from the hourly profile curves.
double predicted_wind_kw(const Config& cfg, int stage);
double predicted_solar_kw(const Config& cfg, int stage);

// All exogenous draws of one simulated stage: raw arrivals for this stage and
// realized renewables for the next. Decision-independent by construction.
env::StageExogenous draw_stage_exogenous(Rng& rng, int stage, const Config& cfg);

// Realized renewables for a stage (forecast plus noise).
void draw_renewables(Rng& rng, int stage, const Config& cfg, double& wind_kw, double& solar_kw);

// --- sampled futures ---------------------------------------------------------

// One EV's presence within one sampled path. Offsets are stages relative to
// the window start; depart_offset may point past the window end.
struct PathPileStay {
    int    pile = 0;
    int    arrive_offset = 0;
    int    depart_offset = 0;     // inclusive last stage of the stay
    double energy_kwh = 0.0;      // requirement at arrival
    int    parking_stages = 0;
    double locked_price = 0.0;
    bool   from_initial_state = false;
};

struct PathStage {
    double posted_price = 0.0;
    env::EventClass event = env::EventClass::E1;
    int    raw_arrivals = 0;
    int    entered = 0;
    int    lost = 0;
    double wind_kw = 0.0;
    double solar_kw = 0.0;
};

struct SamplePath {
    std::vector<PathStage> stages;     // one per window stage
    std::vector<PathPileStay> stays;   // initial piles first, then arrivals in draw order
};

// Price rule for stages after the first: maps (absolute stage, event) to the
// posted price of the incumbent pricing policy.
using PriceFn = std::function<double(int stage, env::EventClass)>;

struct ScenarioSet {
    env::StationState base;         // shared initial state (window stage 0)
    int first_stage = 0;            // absolute stage index of the window start
    int window = 1;
    double first_stage_price = 0.0;
    bool first_stage_arrivals = false;  // paths drew fresh arrivals at offset 0
    std::vector<SamplePath> paths;
};

// Monte Carlo futures over [first_stage, first_stage + window). Occupancy,
// events and prices evolve inside each path; charging decisions do not enter
// (they never change occupancy). With first_stage_arrivals=false the first
// stage is treated as observed: no new arrivals, renewables from `state`.
// Path m is reproducible from (seed_base, m) alone.
ScenarioSet generate_sample_paths(const env::StationState& state, double first_price,
                                  const PriceFn& future_price, int count,
                                  bool first_stage_arrivals, const Config& cfg,
                                  std::uint64_t seed_base);

}  // namespace evsched::stoch
