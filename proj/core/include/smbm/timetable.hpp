#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smbm/annealer.hpp"
#include "smbm/network.hpp"

namespace smbm {

// How the same-period room conflicts (C2, C3) are coupled.
//   printed:        C2 needs a different teacher and room, C3 a different
//                   course and room. A teacher giving the same course in two
//                   rooms at once is then never penalized.
//   room_exclusive: C2 = same course, same period, different room;
//                   C3 = same teacher, same period, different room.
enum class CouplingForm { printed, room_exclusive };

// School timetabling instance over courses (i), teachers (j), rooms (k) and
// periods (l). `load(i, j)` is the number of periods course i should be
// taught by teacher j in each room; coefficients weight the seven penalties.
class TimetableProblem {
 public:
  TimetableProblem(std::size_t courses, std::size_t teachers, std::size_t rooms, std::size_t periods,
                   std::vector<double> load, std::array<double, 7> coefficients,
                   CouplingForm form = CouplingForm::room_exclusive);

  CouplingForm form() const noexcept { return form_; }

  std::size_t courses() const noexcept { return courses_; }
  std::size_t teachers() const noexcept { return teachers_; }
  std::size_t rooms() const noexcept { return rooms_; }
  std::size_t periods() const noexcept { return periods_; }
  std::size_t neurons() const noexcept { return courses_ * teachers_ * rooms_ * periods_; }

  double load(std::size_t course, std::size_t teacher) const { return load_[course * teachers_ + teacher]; }
  const std::array<double, 7>& coefficients() const noexcept { return coefficients_; }
  double coefficient(int m) const { return coefficients_.at(std::size_t(m - 1)); }

  // Row-major (i, j, k, l) flattening and its inverse.
  std::size_t flat_index(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;
  std::array<std::size_t, 4> unflatten(std::size_t index) const;

  // C1/2 * sum_ij R * N_ij^2: the constant that makes the load term a square.
  double load_constant() const;

  // Display names, optional. Empty vectors fall back to numeric labels.
  std::string name;
  std::vector<std::string> course_names;
  std::vector<std::string> teacher_names;
  std::vector<std::string> room_names;
  std::vector<std::string> period_names;

  std::string course_label(std::size_t i) const;
  std::string teacher_label(std::size_t j) const;
  std::string room_label(std::size_t k) const;
  std::string period_label(std::size_t l) const;

 private:
  std::size_t courses_, teachers_, rooms_, periods_;
  std::vector<double> load_;
  std::array<double, 7> coefficients_;
  CouplingForm form_;
};

// 4D Boolean assignment tensor v_ijkl stored in the network's flat order.
class Assignment {
 public:
  explicit Assignment(const TimetableProblem& prob);
  Assignment(const TimetableProblem& prob, SpinState bits);

  bool get(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;
  void set(std::size_t i, std::size_t j, std::size_t k, std::size_t l, bool on = true);

  const SpinState& bits() const noexcept { return bits_; }
  std::array<std::size_t, 4> dims() const noexcept { return dims_; }

 private:
  std::array<std::size_t, 4> dims_;
  SpinState bits_;
};

// Penalty cost, including the load constant, so every assignment scores >= 0
// and a zero-violation schedule scores exactly 0.
double penalty_energy(const TimetableProblem& prob, const Assignment& a);

// Individual penalty terms (already multiplied by C_m / 2; term 0 includes
// the load constant). Their sum is penalty_energy.
std::array<double, 7> penalty_terms(const TimetableProblem& prob, const Assignment& a);

// Violation counts for the five timetabling rules:
//   [0] (course, teacher, room) triples whose period count differs from the load
//   [1] pairs in one period with the same course in different rooms
//       (printed form: and with different teachers)
//   [2] pairs in one period with the same teacher in different rooms
//       (printed form: and with different courses)
//   [3] pairs in one period and room with a different course and teacher
//   [4] pairs with the same course but a different teacher, anywhere
// All zero means the schedule is feasible.
std::array<std::size_t, 5> constraint_violations(const TimetableProblem& prob, const Assignment& a);

// Boltzmann machine whose energy plus load_constant() equals penalty_energy.
Network build_network(const TimetableProblem& prob);

// Crossbar-to-neuron amplifier gain and initial temperature used with the
// canonical demo. Together they place the desk-scale optimum of the expected
// cost inside 3.0 < alpha_t < 3.6 while keeping gamma ~ 0.3 strong enough to
// shake a zero-temperature chain out of local minima (see README).
inline constexpr double kDemoAmplifierGain = 20.0;
inline constexpr double kDemoInitialTemperature = 0.25;

// Network plus the load constant as cost offset, ready for the annealer.
AnnealTarget make_anneal_target(const TimetableProblem& prob, double amplifier_gain = 1.0);

struct Lesson {
  std::size_t course;
  std::size_t teacher;
};

// Room x period grid. A cell holds its lesson only when exactly one
// (course, teacher) pair is active there.
struct Schedule {
  std::size_t rooms = 0;
  std::size_t periods = 0;
  std::vector<std::optional<Lesson>> cells;  // index = period * rooms + room
  std::vector<std::size_t> active_counts;    // active pairs per cell
  bool feasible = false;                     // every cell holds exactly one lesson

  const std::optional<Lesson>& at(std::size_t room, std::size_t period) const {
    return cells[period * rooms + room];
  }
};

Schedule decode(const TimetableProblem& prob, const Assignment& a);

// CSV grid: header "period,<room names>", one row per period, cells
// "teacher:course", empty when unassigned or conflicting.
std::string schedule_csv(const TimetableProblem& prob, const Schedule& schedule);

// 5 courses, teachers, rooms and periods, every coefficient 0.1, and each
// course paired with one designated teacher (load 1 per room).
TimetableProblem canonical_demo();

// The reference day timetable for the canonical demo (a Latin-square rotation).
Assignment reference_timetable(const TimetableProblem& demo);

}  // namespace smbm
