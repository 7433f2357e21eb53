#include "voi/policies.hpp"

#include <cmath>

namespace voi {

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::no_question: return "no_question";
    case PolicyKind::fixed_round: return "fixed_round";
    case PolicyKind::confidence_threshold: return "confidence";
    case PolicyKind::adaptive_prompt: return "adaptive";
    case PolicyKind::voi: return "voi";
  }
  return "unknown";
}

PolicyKind policy_kind_from_name(const std::string& name) {
  if (name == "no_question" || name == "no-question") return PolicyKind::no_question;
  if (name == "fixed_round" || name == "fixed-round" || name == "fixed")
    return PolicyKind::fixed_round;
  if (name == "confidence") return PolicyKind::confidence_threshold;
  if (name == "adaptive") return PolicyKind::adaptive_prompt;
  if (name == "voi") return PolicyKind::voi;
  fail(Errc::bad_config, "unknown policy kind: '" + name + "'");
}

void PolicyConfig::validate() const {
  if ((kind == PolicyKind::fixed_round) != k.has_value())
    fail(Errc::bad_config, "k is required by fixed_round and forbidden elsewhere");
  if ((kind == PolicyKind::confidence_threshold) != tau.has_value())
    fail(Errc::bad_config, "tau is required by confidence and forbidden elsewhere");
  if (k && *k < 0) fail(Errc::bad_config, "k must be >= 0");
  if (tau && (*tau < 0.0 || *tau > 1.0)) fail(Errc::bad_config, "tau must be in [0,1]");
}

std::string PolicyConfig::label() const {
  std::string base = policy_kind_name(kind);
  std::string param = parameter();
  return param.empty() ? base : base + "(" + param + ")";
}

std::string PolicyConfig::parameter() const {
  if (k) return "k=" + std::to_string(*k);
  if (tau) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "tau=%.2f", *tau);
    return buf;
  }
  return "";
}

int Policy::final_action(const DecisionContext& ctx) {
  return best_action_value(ctx.belief, ctx.task.utility).action;
}

namespace {

void publish_report(const DecisionContext& ctx, const VoiReport& report) {
  if (ctx.report_out) {
    *ctx.report_out = report;
    if (ctx.report_filled) *ctx.report_filled = true;
  }
}

// Candidate scores under the episode's cost model, decision per the net-value
// rule. Policies that only need the scores ignore `chosen`.
VoiReport score_candidates(const DecisionContext& ctx, const CostModel& cost) {
  AnswerModelFn answer_model = [&](int q) {
    return ctx.estimator.answer_table(ctx.task, ctx.history, q);
  };
  PosteriorFn posterior = [&](int q, int y) {
    return ctx.estimator.posterior(ctx.task, ctx.belief, ctx.history, q, y);
  };
  return voi_step_with(ctx.belief, ctx.candidates, answer_model, posterior, ctx.task.utility,
                       cost);
}

// Highest-VoI candidate regardless of sign; ties break to the lowest id.
// Scores arrive in ascending question order, so strict > suffices.
int best_scored_question(const VoiReport& report) {
  int best = -1;
  double best_voi = 0.0;
  for (const QuestionScore& s : report.scores) {
    if (best < 0 || s.voi > best_voi) {
      best = s.question;
      best_voi = s.voi;
    }
  }
  return best;
}

class NoQuestionPolicy final : public Policy {
 public:
  explicit NoQuestionPolicy(PolicyConfig cfg) : cfg_(cfg) {}
  const PolicyConfig& config() const override { return cfg_; }

  PolicyDecision decide(const DecisionContext& ctx) override {
    return Commit{best_action_value(ctx.belief, ctx.task.utility).action};
  }

 private:
  PolicyConfig cfg_;
};

class FixedRoundPolicy final : public Policy {
 public:
  explicit FixedRoundPolicy(PolicyConfig cfg) : cfg_(cfg) {}
  const PolicyConfig& config() const override { return cfg_; }

  PolicyDecision decide(const DecisionContext& ctx) override {
    if (ctx.turn >= *cfg_.k || ctx.candidates.empty())
      return Commit{best_action_value(ctx.belief, ctx.task.utility).action};
    // Non-adaptive: always asks while under budget. Question choice reuses
    // VoI scoring with the cost zeroed out.
    VoiReport report = score_candidates(ctx, CostModel{});
    int q = best_scored_question(report);
    report.chosen = Clarify{q};
    publish_report(ctx, report);
    return Clarify{q};
  }

 private:
  PolicyConfig cfg_;
};

class ConfidenceThresholdPolicy final : public Policy {
 public:
  explicit ConfidenceThresholdPolicy(PolicyConfig cfg) : cfg_(cfg) {}
  const PolicyConfig& config() const override { return cfg_; }

  PolicyDecision decide(const DecisionContext& ctx) override {
    ConfidenceReport conf =
        ctx.estimator.commit_confidence(ctx.task, ctx.belief, ctx.history);
    if (conf.confidence >= *cfg_.tau || ctx.candidates.empty()) {
      int action = conf.guess_action.value_or(
          best_action_value(ctx.belief, ctx.task.utility).action);
      return Commit{action};
    }
    VoiReport report = score_candidates(ctx, CostModel{});
    int q = best_scored_question(report);
    report.chosen = Clarify{q};
    publish_report(ctx, report);
    return Clarify{q};
  }

  int final_action(const DecisionContext& ctx) override {
    ConfidenceReport conf =
        ctx.estimator.commit_confidence(ctx.task, ctx.belief, ctx.history);
    return conf.guess_action.value_or(best_action_value(ctx.belief, ctx.task.utility).action);
  }

 private:
  PolicyConfig cfg_;
};

class AdaptivePromptPolicy final : public Policy {
 public:
  explicit AdaptivePromptPolicy(PolicyConfig cfg) : cfg_(cfg) {}
  const PolicyConfig& config() const override { return cfg_; }

  PolicyDecision decide(const DecisionContext& ctx) override {
    if (!ctx.estimator.caps().supports_adaptive_prompting)
      fail(Errc::backend_unavailable,
           "adaptive prompting requires a backend with self-assessment support");
    if (ctx.candidates.empty())
      return Commit{final_action(ctx)};
    return ctx.estimator.adaptive_step(ctx.task, ctx.belief, ctx.history, ctx.candidates);
  }

  int final_action(const DecisionContext& ctx) override {
    if (ctx.estimator.caps().supports_verbalized_confidence) {
      ConfidenceReport conf =
          ctx.estimator.commit_confidence(ctx.task, ctx.belief, ctx.history);
      if (conf.guess_action) return *conf.guess_action;
    }
    return best_action_value(ctx.belief, ctx.task.utility).action;
  }

 private:
  PolicyConfig cfg_;
};

class VoiPolicy final : public Policy {
 public:
  explicit VoiPolicy(PolicyConfig cfg) : cfg_(cfg) {}
  const PolicyConfig& config() const override { return cfg_; }

  PolicyDecision decide(const DecisionContext& ctx) override {
    VoiReport report = score_candidates(ctx, ctx.cost);
    publish_report(ctx, report);
    return report.chosen;
  }

 private:
  PolicyConfig cfg_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& config) {
  config.validate();
  switch (config.kind) {
    case PolicyKind::no_question: return std::make_unique<NoQuestionPolicy>(config);
    case PolicyKind::fixed_round: return std::make_unique<FixedRoundPolicy>(config);
    case PolicyKind::confidence_threshold:
      return std::make_unique<ConfidenceThresholdPolicy>(config);
    case PolicyKind::adaptive_prompt: return std::make_unique<AdaptivePromptPolicy>(config);
    case PolicyKind::voi: return std::make_unique<VoiPolicy>(config);
  }
  fail(Errc::bad_config, "unhandled policy kind");
}

}  // namespace voi
