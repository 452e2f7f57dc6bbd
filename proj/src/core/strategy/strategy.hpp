#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace olymp::strategy {

struct EventWeightInputs {
    double hist_perf = 0.0;
    double invest = 0.0;
    double coach_flow = 0.0;
    double alpha = 0.5;
    double beta = 0.3;
    double gamma = 0.2;
};

double event_weight(const EventWeightInputs& in);

struct ProgramEvent {
    std::string event;
    double pool = 0.0;  ///< medals awarded in the event
};

enum class ChangeKind { Added, Removed };

struct ProgramChange {
    std::string event;
    ChangeKind kind = ChangeKind::Added;
    double pool = 0.0;  ///< medals of an added event; removed events use the program's pool
};

struct EventAffinity {
    std::string noc;
    std::string event;
    double affinity = 0.0;  ///< in [0, 1]
    EventWeightInputs weight;
};

struct HostSimInput {
    std::map<std::string, double> baseline;  ///< predicted medals per NOC before the change
    std::vector<ProgramEvent> program;       ///< current events
    std::vector<ProgramChange> changes;
    std::vector<EventAffinity> affinities;
};

struct CountryImpact {
    std::string noc;
    double baseline = 0.0;
    double delta = 0.0;
    double percent = 0.0;     ///< 100 delta / baseline (0 when baseline is 0)
    std::string major_event;  ///< event with the largest |contribution|, empty when delta is 0
};

struct HostImpact {
    std::vector<CountryImpact> countries;  ///< by delta descending, then NOC
    double pool_change = 0.0;              ///< added minus removed medals
    double total_percentage = 0.0;         ///< 100 pool_change / sum of baselines

    const CountryImpact& at(const std::string& noc) const;
};

/// Each added event's pool is shared among countries in proportion to
/// affinity x event_weight; a removed event takes its pool back in the same
/// proportions. Sum of deltas equals pool_change.
HostImpact host_impact_sim(const HostSimInput& input);

/// "Country,Predicted Additional Medals,Major Factors"; the middle column is
/// the integer band around the delta, e.g. "2-3".
std::string format_impact_table(const HostImpact& impact);
std::string medal_band(double delta);

inline constexpr double kApplicabilityThreshold = 0.53;

struct Applicability {
    double f = 0.0;
    bool applicable = false;
};

/// f = 0.71 gdp + 0.29 openness - 0.15 instability on z-scored inputs; applicable iff f > 0.53.
Applicability applicability(double gdp, double openness, double instability);

struct AllocationProblem {
    std::vector<std::string> sports;  ///< optional labels
    std::vector<double> w;
    std::vector<double> alpha;
    std::vector<double> beta;
    double rho = 0.68;
    double budget = 1.0;
    double tolerance = 1e-6;  ///< relative KKT stationarity residual
    int max_iter = 100000;

    void validate() const;
};

struct Allocation {
    std::vector<double> x;  ///< economic investment
    std::vector<double> y;  ///< institutional investment
    double objective = 0.0;
    double ratio = 0.0;     ///< sum x / sum y
    double kkt_residual = 0.0;
    int iterations = 0;
    std::vector<double> objective_trace;
};

double allocation_objective(const AllocationProblem& p, const std::vector<double>& x, const std::vector<double>& y);

/// Projected gradient ascent on {x, y >= 0, sum(x + y) = B} with Armijo
/// backtracking from a Barzilai-Borwein step. Sports with w = 0 receive nothing.
/// Throws NonConvergenceError (last iterate x then y) when max_iter is reached.
Allocation optimize_allocation(const AllocationProblem& problem);

/// Euclidean projection onto {z >= 0, sum z = total}.
std::vector<double> project_simplex(const std::vector<double>& v, double total);

/// Peak of the inverted-U: theta1 / (2 theta2). Requires theta2 > 0.
double gdp_peak(double theta1, double theta2);

/// "noc,medals"
std::map<std::string, double> read_baseline(std::istream& in, const std::string& source);
/// "event,pool"
std::vector<ProgramEvent> read_program(std::istream& in, const std::string& source);
/// "event,change,pool" with change in {added, removed}
std::vector<ProgramChange> read_changes(std::istream& in, const std::string& source);
/// "noc,event,affinity,hist_perf,invest,coach_flow"; weight coefficients come from `coefficients`.
std::vector<EventAffinity> read_affinities(std::istream& in, const std::string& source,
                                           const EventWeightInputs& coefficients = {});
/// "sport,w,alpha,beta"
AllocationProblem read_allocation(std::istream& in, const std::string& source);

} // namespace olymp::strategy
