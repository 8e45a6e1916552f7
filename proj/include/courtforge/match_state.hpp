#pragma once

#include <cstdint>

namespace courtforge {

enum class CourtPosition : std::uint8_t { Baseline = 0, Midcourt = 1, Net = 2 };
enum class BallDepth : std::uint8_t { Short = 0, Neutral = 1, Deep = 2 };

// Full internal match situation. Point counters use 4 to mean advantage.
// During a tiebreak the regular point counters stay at 0 and the tiebreak
// counters carry the score.
struct MatchState {
    int p_pts = 0;
    int o_pts = 0;
    int p_games = 0;
    int o_games = 0;
    int p_sets = 0;
    int o_sets = 0;
    bool serving = true;
    bool deuce = false;
    bool adv_p = false;
    bool adv_o = false;
    bool tiebreak = false;
    double f_p = 0.0;
    double f_o = 0.0;
    bool ad_side = false;
    int rally_len = 0;
    CourtPosition pos_p = CourtPosition::Baseline;
    CourtPosition pos_o = CourtPosition::Baseline;
    BallDepth ball_depth = BallDepth::Neutral;
    int step_count = 0;
    int tb_p = 0;
    int tb_o = 0;
    // Who served the first tiebreak point; drives the 1-then-2 rotation.
    bool tb_first_server_agent = true;

    friend bool operator==(const MatchState&, const MatchState&) = default;
};

}  // namespace courtforge
