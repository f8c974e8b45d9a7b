#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nnghmc/data_io.hpp>
#include <nnghmc/diagnostics.hpp>
#include <nnghmc/experiment.hpp>
#include <nnghmc/hmc.hpp>
#include <nnghmc/mlp.hpp>
#include <nnghmc/properties.hpp>
#include <nnghmc/targets.hpp>

#include <sstream>

namespace py = pybind11;
using namespace nnghmc;

namespace {

py::dict chain_dict(const Chain& c) {
  py::dict d;
  d["draws"] = c.draws;
  d["accepted"] = std::vector<bool>(c.accepted.begin(), c.accepted.end());
  d["delta_h"] = c.delta_h;
  d["acceptance"] = c.acceptance_rate();
  d["seconds"] = c.elapsed.total();
  return d;
}

}  // namespace

PYBIND11_MODULE(_nnghmc, m) {
  m.doc() = "HMC with neural-network gradient approximations";

  py::class_<TargetModel>(m, "TargetModel")
      .def_property_readonly("dim", &TargetModel::dim)
      .def_property_readonly("name", &TargetModel::name)
      .def("potential", &TargetModel::potential)
      .def("gradient", &TargetModel::gradient)
      .def("in_support", &TargetModel::in_support);
  py::class_<BananaTarget, TargetModel>(m, "BananaTarget").def(py::init<double, double, double>(), py::arg("a"),
                                                               py::arg("b"), py::arg("c"));
  py::class_<DiagonalGaussianTarget, TargetModel>(m, "DiagonalGaussianTarget")
      .def(py::init<Vector>(), py::arg("variances"));
  py::class_<MinibatchTarget, TargetModel>(m, "MinibatchTarget");
  py::class_<LogisticRegressionTarget, MinibatchTarget>(m, "LogisticRegressionTarget")
      .def(py::init([](Matrix x, Vector y, double prior_variance) {
             return LogisticRegressionTarget(std::move(x), std::move(y),
                                             {CoefficientPrior::Kind::gaussian, prior_variance});
           }),
           py::arg("x"), py::arg("y"), py::arg("prior_variance") = 10.0);
  py::class_<GarchTarget, TargetModel>(m, "GarchTarget")
      .def(py::init<Vector, int, int, double>(), py::arg("y"), py::arg("arch_order"), py::arg("garch_order"),
           py::arg("prior_sd") = 10.0)
      .def("variance_recursion", &GarchTarget::variance_recursion);
  m.def("ill_conditioned_variances", &ill_conditioned_variances, py::arg("dim"), py::arg("seed"),
        py::arg("smallest") = 0.1, py::arg("largest") = 1000.0, py::arg("lo") = 1.0, py::arg("hi") = 100.0);

  m.def(
      "run_hmc",
      [](const TargetModel& target, Vector init, int leapfrog_steps, double step_size, long iterations,
         std::uint64_t seed) {
        HmcConfig cfg{leapfrog_steps, step_size, iterations, seed};
        ExactOracle oracle(target);
        return chain_dict(run_chain(target, oracle, cfg, init));
      },
      py::arg("target"), py::arg("init"), py::arg("leapfrog_steps") = 10, py::arg("step_size") = 0.1,
      py::arg("iterations") = 1000, py::arg("seed") = 1, "Exact-gradient HMC chain.");

  m.def(
      "run_nnghmc",
      [](const TargetModel& target, Vector init, int leapfrog_steps, double step_size, long iterations,
         long collect_iterations, int hidden, int epochs, std::uint64_t seed) {
        HmcConfig cfg{leapfrog_steps, step_size, iterations, seed};
        TrainConfig tc;
        tc.epochs = epochs;
        tc.seed = seed;
        NnghmcResult r =
            run_nnghmc(target, cfg, TrainingSchedule::fixed(collect_iterations), NetSpec{hidden, 1, seed}, tc, init);
        py::dict d = chain_dict(r.chain);
        d["adopted"] = r.adopted;
        d["surrogate_acceptance"] = r.chain.acceptance_rate(true);
        d["exact_acceptance"] = r.chain.acceptance_rate(false);
        d["net"] = r.net ? py::cast(r.net->to_text()) : py::none();
        return d;
      },
      py::arg("target"), py::arg("init"), py::arg("leapfrog_steps") = 10, py::arg("step_size") = 0.1,
      py::arg("iterations") = 1000, py::arg("collect_iterations") = 200, py::arg("hidden") = 100,
      py::arg("epochs") = 50, py::arg("seed") = 1,
      "Exact HMC while collecting gradients, then HMC with a trained network gradient.");

  m.def(
      "net_forward",
      [](const std::string& net_text, const Vector& q) { return MlpGradientNet::from_text(net_text).forward(q); },
      py::arg("net"), py::arg("q"));

  m.def(
      "ess",
      [](const Matrix& draws, double burn_in) {
        const EssReport r = ess(draws, burn_in);
        py::dict d;
        d["per_dim"] = r.per_dim;
        d["min"] = r.min;
        d["median"] = r.median;
        d["max"] = r.max;
        d["degenerate"] = r.degenerate;
        return d;
      },
      py::arg("draws"), py::arg("burn_in") = kDefaultBurnIn);

  m.def("ks_statistic", &ks_statistic);

  m.def(
      "gen_logistic",
      [](Index n, Index d, std::uint64_t seed) {
        LogisticData ld = gen_logistic(n, d, seed);
        return py::make_tuple(ld.data.x, ld.data.y, ld.beta);
      },
      py::arg("n"), py::arg("d"), py::arg("seed"));
  m.def("gen_garch", &gen_garch, py::arg("length"), py::arg("arch"), py::arg("garch"), py::arg("seed"));

  m.def("resolve_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
        "Parse a JSON experiment config and return it with every default filled in.");
  m.def(
      "run_config",
      [](const std::string& text) {
        const ExperimentConfig cfg = parse_config(text);
        const RunResult run = run_experiment(cfg);
        py::dict d = chain_dict(run.chain);
        d["summary"] = summary_json(cfg, run);
        return d;
      },
      "Run a JSON experiment config in memory.");

  m.def(
      "verify",
      [](long chi_square_draws) {
        VerifyOptions opts;
        opts.chi_square_draws = chi_square_draws;
        std::ostringstream out;
        const bool ok = cmd_verify(out, opts);
        return py::make_tuple(ok, out.str());
      },
      py::arg("chi_square_draws") = 200000);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}
