#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace campaign::tc {

// Secondary-structure classes, numbered in the order G H I E B T S C.
inline constexpr std::size_t kClassCount = 8;
inline constexpr std::string_view kAlphabet = "GHIEBTSC";

using ClassCode = std::uint8_t;
using ClassDistribution = std::array<double, kClassCount>;
using TransitionMatrix = std::array<std::array<double, kClassCount>, kClassCount>;

/// Letter for a class code (0 -> 'G' ... 7 -> 'C'). Throws InputError when
/// the code is out of range.
char class_letter(ClassCode code);
/// Code for a class letter, or std::nullopt for a character outside the alphabet.
std::optional<ClassCode> class_code(char letter);

struct ClassSequence {
  std::size_t residue = 0;
  std::vector<ClassCode> frames;
};

struct TransitionEvent {
  std::size_t residue = 0;
  std::size_t t_a = 0;        // first frame whose class differs from its predecessor
  ClassCode initial_class = 0;  // class at t_a - 1
};

/// One line per frame, one character per residue. Blank trailing lines are
/// ignored. Throws ParseError (with line number) for ragged lines or foreign
/// characters and InputError for input without frames.
std::vector<ClassSequence> parse_class_file(std::istream& in);
std::vector<ClassSequence> parse_class_text(std::string_view text);

/// Inverse of parse_class_file. Throws InputError for sequences of unequal length.
void write_class_file(std::ostream& out, std::span<const ClassSequence> residues);

/// The first consecutive-frame class change; later changes are ignored.
std::optional<TransitionEvent> detect_event(const ClassSequence& seq);

/// Row-normalized counts of consecutive-frame transitions among frames
/// [t_a, min(t_a + window, len)). Rows without counts become identity rows.
/// Throws EstimationError when fewer than two frames are available.
TransitionMatrix build_matrix(const ClassSequence& seq, const TransitionEvent& event,
                              std::size_t window);

/// True when every entry is non-negative and each row sums to 1 within tol.
bool is_row_stochastic(const TransitionMatrix& m, double tol = 1e-9);

/// Cesaro average (1/h) * sum_{t=1..h} e_start * T^t. Throws InputError for a
/// non-stochastic matrix, horizon 0 or an out-of-range start class.
ClassDistribution predict_occupancy(const TransitionMatrix& m, ClassCode start,
                                    std::size_t horizon);

/// Class frequencies over frames (t_a, t_a + horizon], truncated at the end of
/// the sequence. Throws EstimationError when no frame follows t_a.
ClassDistribution observed_occupancy(const ClassSequence& seq, const TransitionEvent& event,
                                     std::size_t horizon);

/// Jensen-Shannon divergence with base-2 logarithms, in [0, 1].
double js_divergence(std::span<const double> p, std::span<const double> q);

/// Index of the largest entry; ties resolve to the lower class code.
ClassCode modal_class(const ClassDistribution& d);

/// Forecasts future class occupancy from the frames that follow an event.
class OccupancyPredictor {
 public:
  virtual ~OccupancyPredictor() = default;
  virtual ClassDistribution predict(const ClassSequence& seq, const TransitionEvent& event,
                                    std::size_t horizon) const = 0;
};

/// Builds a transition matrix over the event window and propagates the class
/// at t_a through it.
class MarkovPredictor final : public OccupancyPredictor {
 public:
  explicit MarkovPredictor(std::size_t window = 100) : window_(window) {}
  ClassDistribution predict(const ClassSequence& seq, const TransitionEvent& event,
                            std::size_t horizon) const override;
  std::size_t window() const noexcept { return window_; }

 private:
  std::size_t window_;
};

struct EventOutcome {
  TransitionEvent event;
  ClassDistribution predicted{};
  ClassDistribution observed{};
};

struct LabelDivergence {
  std::string label;  // initial class digit followed by modal observed class digit
  std::size_t events = 0;
  double js_divergence = 0.0;
};

/// Groups outcomes by label, averages the predicted and observed
/// distributions within each group and reports one divergence per label,
/// sorted by ascending divergence (then label).
std::vector<LabelDivergence> evaluate_transitions(std::span<const EventOutcome> outcomes);

struct ClassifierOptions {
  std::size_t window = 100;
  std::size_t horizon = 1500;
};

struct ClassificationRun {
  std::vector<EventOutcome> outcomes;
  std::vector<std::size_t> skipped;  // residues whose event lacked data
  std::vector<LabelDivergence> table;
};

/// Detects events in every residue, predicts and observes occupancy and
/// evaluates the result. Residues without a change produce no outcome.
ClassificationRun classify(std::span<const ClassSequence> residues,
                           const OccupancyPredictor& predictor, const ClassifierOptions& opts);

/// Columns label,js_divergence.
void write_evaluation_csv(std::ostream& out, std::span<const LabelDivergence> rows);
std::vector<LabelDivergence> read_evaluation_csv(std::istream& in);

/// Seeded Markov chain sample of the given length. Throws InputError for a
/// non-stochastic matrix or zero length.
ClassSequence generate_markov_sequence(const TransitionMatrix& m, ClassCode start,
                                       std::size_t length, std::uint64_t seed,
                                       std::size_t residue = 0);

}  // namespace campaign::tc
