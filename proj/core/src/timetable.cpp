#include "smbm/timetable.hpp"

#include <cmath>
#include <sstream>

#include "smbm/error.hpp"

namespace smbm {

TimetableProblem::TimetableProblem(std::size_t courses, std::size_t teachers, std::size_t rooms,
                                   std::size_t periods, std::vector<double> load,
                                   std::array<double, 7> coefficients, CouplingForm form)
    : courses_(courses),
      teachers_(teachers),
      rooms_(rooms),
      periods_(periods),
      load_(std::move(load)),
      coefficients_(coefficients),
      form_(form) {
  if (courses_ == 0 || teachers_ == 0 || rooms_ == 0 || periods_ == 0) {
    throw InvalidParameter("timetable sizes must all be >= 1");
  }
  if (load_.size() != courses_ * teachers_) {
    throw DimensionMismatch("load matrix must have courses x teachers entries");
  }
  for (double n : load_) {
    if (!(n >= 0.0) || !std::isfinite(n) || n != std::floor(n)) {
      throw InvalidParameter("load entries must be non-negative integers");
    }
  }
  for (double c : coefficients_) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParameter("penalty coefficients must be >= 0");
  }
}

std::size_t TimetableProblem::flat_index(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  if (i >= courses_ || j >= teachers_ || k >= rooms_ || l >= periods_) {
    throw InvalidParameter("assignment index out of range");
  }
  return ((i * teachers_ + j) * rooms_ + k) * periods_ + l;
}

std::array<std::size_t, 4> TimetableProblem::unflatten(std::size_t index) const {
  if (index >= neurons()) throw InvalidParameter("flat index out of range");
  const std::size_t l = index % periods_;
  index /= periods_;
  const std::size_t k = index % rooms_;
  index /= rooms_;
  const std::size_t j = index % teachers_;
  return {index / teachers_, j, k, l};
}

double TimetableProblem::load_constant() const {
  double sq = 0.0;
  for (double n : load_) sq += n * n;
  return 0.5 * coefficients_[0] * sq * static_cast<double>(rooms_);
}

namespace {

std::string label(const std::vector<std::string>& names, std::size_t idx, const char* prefix) {
  if (idx < names.size()) return names[idx];
  return prefix + std::to_string(idx + 1);
}

}  // namespace

std::string TimetableProblem::course_label(std::size_t i) const { return label(course_names, i, "course"); }
std::string TimetableProblem::teacher_label(std::size_t j) const { return label(teacher_names, j, "teacher"); }
std::string TimetableProblem::room_label(std::size_t k) const { return label(room_names, k, "room"); }
std::string TimetableProblem::period_label(std::size_t l) const { return label(period_names, l, ""); }

Assignment::Assignment(const TimetableProblem& prob)
    : dims_{prob.courses(), prob.teachers(), prob.rooms(), prob.periods()}, bits_(prob.neurons(), 0) {}

Assignment::Assignment(const TimetableProblem& prob, SpinState bits)
    : dims_{prob.courses(), prob.teachers(), prob.rooms(), prob.periods()}, bits_(std::move(bits)) {
  if (bits_.size() != prob.neurons()) throw DimensionMismatch("assignment size does not match problem");
  for (auto b : bits_) {
    if (b > 1) throw InvalidParameter("assignment entries must be 0 or 1");
  }
}

bool Assignment::get(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  return bits_[((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + l] != 0;
}

void Assignment::set(std::size_t i, std::size_t j, std::size_t k, std::size_t l, bool on) {
  if (i >= dims_[0] || j >= dims_[1] || k >= dims_[2] || l >= dims_[3]) {
    throw InvalidParameter("assignment index out of range");
  }
  bits_[((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + l] = on ? 1 : 0;
}

namespace {

void check_dims(const TimetableProblem& prob, const Assignment& a) {
  const auto d = a.dims();
  if (d[0] != prob.courses() || d[1] != prob.teachers() || d[2] != prob.rooms() || d[3] != prob.periods()) {
    throw DimensionMismatch("assignment dimensions do not match problem");
  }
}

// Ordered pairs (a, b) from a 2D slice of binary entries x[p][q]. With
// `both_differ`, pairs whose p AND q differ: S^2 - sum_p row_p^2 - sum_q col_q^2 + S.
// Otherwise pairs whose q differs: S^2 - sum_q col_q^2.
double cross_pairs(const std::vector<double>& slice, std::size_t rows, std::size_t cols, bool both_differ) {
  double total = 0.0;
  double row_sq = 0.0;
  std::vector<double> col(cols, 0.0);
  for (std::size_t p = 0; p < rows; ++p) {
    double row = 0.0;
    for (std::size_t q = 0; q < cols; ++q) {
      row += slice[p * cols + q];
      col[q] += slice[p * cols + q];
    }
    total += row;
    row_sq += row * row;
  }
  double col_sq = 0.0;
  for (double c : col) col_sq += c * c;
  if (!both_differ) return total * total - col_sq;
  return total * total - row_sq - col_sq + total;
}

}  // namespace

std::array<double, 7> penalty_terms(const TimetableProblem& prob, const Assignment& a) {
  check_dims(prob, a);
  const std::size_t nc = prob.courses(), nt = prob.teachers(), nr = prob.rooms(), np = prob.periods();
  const auto& c = prob.coefficients();
  auto v = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return a.get(i, j, k, l) ? 1.0 : 0.0;
  };

  std::array<double, 7> terms{};
  const bool printed = prob.form() == CouplingForm::printed;

  // C1: load deviation per (course, teacher, room).
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t k = 0; k < nr; ++k) {
        double count = 0.0;
        for (std::size_t l = 0; l < np; ++l) count += v(i, j, k, l);
        const double dev = count - prob.load(i, j);
        terms[0] += dev * dev;
      }

  // C2: same course and period, room differs (printed: teacher differs too).
  std::vector<double> slice;
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t l = 0; l < np; ++l) {
      slice.assign(nt * nr, 0.0);
      for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t k = 0; k < nr; ++k) slice[j * nr + k] = v(i, j, k, l);
      terms[1] += cross_pairs(slice, nt, nr, printed);
    }

  // C3: same teacher and period, room differs (printed: course differs too).
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t l = 0; l < np; ++l) {
      slice.assign(nc * nr, 0.0);
      for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t k = 0; k < nr; ++k) slice[i * nr + k] = v(i, j, k, l);
      terms[2] += cross_pairs(slice, nc, nr, printed);
    }

  // C4: same room and period, course and teacher both differ.
  for (std::size_t k = 0; k < nr; ++k)
    for (std::size_t l = 0; l < np; ++l) {
      slice.assign(nc * nt, 0.0);
      for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nt; ++j) slice[i * nt + j] = v(i, j, k, l);
      terms[3] += cross_pairs(slice, nc, nt, true);
    }

  // C5: same course, room and period with different teachers.
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t k = 0; k < nr; ++k)
      for (std::size_t l = 0; l < np; ++l) {
        double s = 0.0;
        for (std::size_t j = 0; j < nt; ++j) s += v(i, j, k, l);
        terms[4] += s * s - s;
      }

  // C6: same teacher, room and period with different courses.
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t k = 0; k < nr; ++k)
      for (std::size_t l = 0; l < np; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < nc; ++i) s += v(i, j, k, l);
        terms[5] += s * s - s;
      }

  // C7: same course with different teachers, across all rooms and periods.
  for (std::size_t i = 0; i < nc; ++i) {
    double total = 0.0;
    double sq = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < nr; ++k)
        for (std::size_t l = 0; l < np; ++l) s += v(i, j, k, l);
      total += s;
      sq += s * s;
    }
    terms[6] += total * total - sq;
  }

  for (std::size_t m = 0; m < 7; ++m) terms[m] *= 0.5 * c[m];
  return terms;
}

double penalty_energy(const TimetableProblem& prob, const Assignment& a) {
  double total = 0.0;
  for (double t : penalty_terms(prob, a)) total += t;
  return total;
}

std::array<std::size_t, 5> constraint_violations(const TimetableProblem& prob, const Assignment& a) {
  check_dims(prob, a);
  std::array<std::size_t, 5> counts{};
  std::vector<std::array<std::size_t, 4>> active;
  const auto& bits = a.bits();
  for (std::size_t n = 0; n < bits.size(); ++n) {
    if (bits[n]) active.push_back(prob.unflatten(n));
  }

  std::vector<std::size_t> loads(prob.courses() * prob.teachers() * prob.rooms(), 0);
  for (const auto& e : active) loads[(e[0] * prob.teachers() + e[1]) * prob.rooms() + e[2]]++;
  for (std::size_t i = 0; i < prob.courses(); ++i)
    for (std::size_t j = 0; j < prob.teachers(); ++j)
      for (std::size_t k = 0; k < prob.rooms(); ++k) {
        if (double(loads[(i * prob.teachers() + j) * prob.rooms() + k]) != prob.load(i, j)) ++counts[0];
      }

  const bool printed = prob.form() == CouplingForm::printed;
  for (std::size_t x = 0; x < active.size(); ++x) {
    for (std::size_t y = x + 1; y < active.size(); ++y) {
      const auto& p = active[x];
      const auto& q = active[y];
      const bool same_course = p[0] == q[0], same_teacher = p[1] == q[1];
      const bool same_room = p[2] == q[2], same_period = p[3] == q[3];
      if (same_period && same_course && !same_room && (!printed || !same_teacher)) ++counts[1];
      if (same_period && same_teacher && !same_room && (!printed || !same_course)) ++counts[2];
      if (same_period && same_room && !same_course && !same_teacher) ++counts[3];
      if (same_course && !same_teacher) ++counts[4];
    }
  }
  return counts;
}

Network build_network(const TimetableProblem& prob) {
  const std::size_t n = prob.neurons();
  const auto dim = static_cast<Eigen::Index>(n);
  const auto& c = prob.coefficients();
  // Factor that the printed form puts on the "other" index of C2 and C3.
  const bool printed = prob.form() == CouplingForm::printed;
  Eigen::MatrixXd w(dim, dim);
  Eigen::VectorXd bias(dim);

  for (std::size_t a = 0; a < n; ++a) {
    const auto [i, j, k, l] = prob.unflatten(a);
    bias(Eigen::Index(a)) = c[0] * prob.load(i, j);
    for (std::size_t b = 0; b < n; ++b) {
      const auto [i2, j2, k2, l2] = prob.unflatten(b);
      const double di = i == i2, dj = j == j2, dk = k == k2, dl = l == l2;
      double value = -c[0] * di * dj * dk;
      const double other_j = printed ? 1 - dj : 1.0;
      const double other_i = printed ? 1 - di : 1.0;
      value -= c[1] * di * other_j * (1 - dk) * dl;
      value -= c[2] * other_i * dj * (1 - dk) * dl;
      value -= c[3] * (1 - di) * (1 - dj) * dk * dl;
      value -= c[4] * di * (1 - dj) * dk * dl;
      value -= c[5] * (1 - di) * dj * dk * dl;
      value -= c[6] * di * (1 - dj);
      w(Eigen::Index(a), Eigen::Index(b)) = value;
    }
  }
  // The constructor folds the C1 self-coupling on the diagonal into the bias.
  return Network(std::move(w), std::move(bias));
}

AnnealTarget make_anneal_target(const TimetableProblem& prob, double amplifier_gain) {
  return AnnealTarget{build_network(prob), prob.load_constant(), amplifier_gain};
}

Schedule decode(const TimetableProblem& prob, const Assignment& a) {
  check_dims(prob, a);
  Schedule s;
  s.rooms = prob.rooms();
  s.periods = prob.periods();
  s.cells.assign(s.rooms * s.periods, std::nullopt);
  s.active_counts.assign(s.rooms * s.periods, 0);
  std::vector<Lesson> last(s.rooms * s.periods, Lesson{0, 0});
  for (std::size_t i = 0; i < prob.courses(); ++i)
    for (std::size_t j = 0; j < prob.teachers(); ++j)
      for (std::size_t k = 0; k < prob.rooms(); ++k)
        for (std::size_t l = 0; l < prob.periods(); ++l) {
          if (!a.get(i, j, k, l)) continue;
          const std::size_t cell = l * s.rooms + k;
          s.active_counts[cell]++;
          last[cell] = Lesson{i, j};
        }
  s.feasible = true;
  for (std::size_t cell = 0; cell < s.cells.size(); ++cell) {
    if (s.active_counts[cell] == 1) {
      s.cells[cell] = last[cell];
    } else {
      s.feasible = false;
    }
  }
  return s;
}

std::string schedule_csv(const TimetableProblem& prob, const Schedule& schedule) {
  std::ostringstream out;
  out << "period";
  for (std::size_t k = 0; k < schedule.rooms; ++k) out << ',' << prob.room_label(k);
  out << '\n';
  for (std::size_t l = 0; l < schedule.periods; ++l) {
    out << prob.period_label(l);
    for (std::size_t k = 0; k < schedule.rooms; ++k) {
      out << ',';
      if (const auto& lesson = schedule.at(k, l)) {
        out << prob.teacher_label(lesson->teacher) << ':' << prob.course_label(lesson->course);
      }
    }
    out << '\n';
  }
  return out.str();
}

TimetableProblem canonical_demo() {
  constexpr std::size_t size = 5;
  std::vector<double> load(size * size, 0.0);
  for (std::size_t i = 0; i < size; ++i) load[i * size + i] = 1.0;
  std::array<double, 7> coeffs;
  coeffs.fill(0.1);
  TimetableProblem prob(size, size, size, size, std::move(load), coeffs);
  prob.name = "canonical-5x5x5x5";
  // Course i is taught by teacher i: Alice-S, Bob-H, Cindy-M, David-P, Edward-L.
  prob.course_names = {"S", "H", "M", "P", "L"};
  prob.teacher_names = {"Alice", "Bob", "Cindy", "David", "Edward"};
  prob.room_names = {"C1", "C2", "C3", "C4", "C5"};
  prob.period_names = {"1", "2", "3", "4", "5"};
  return prob;
}

Assignment reference_timetable(const TimetableProblem& demo) {
  // Teacher (= course) index per [period][room].
  static constexpr std::size_t grid[5][5] = {
      {0, 3, 1, 2, 4}, {1, 4, 2, 3, 0}, {2, 1, 4, 0, 3}, {3, 2, 0, 4, 1}, {4, 0, 3, 1, 2}};
  if (demo.courses() != 5 || demo.teachers() != 5 || demo.rooms() != 5 || demo.periods() != 5) {
    throw DimensionMismatch("reference timetable is defined for the 5x5x5x5 demo");
  }
  Assignment a(demo);
  for (std::size_t l = 0; l < 5; ++l)
    for (std::size_t k = 0; k < 5; ++k) a.set(grid[l][k], grid[l][k], k, l);
  return a;
}

}  // namespace smbm
