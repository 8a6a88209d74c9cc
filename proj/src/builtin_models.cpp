#include "ifsm/builtin_models.hpp"

#include <charconv>

#include "ifsm/error.hpp"

namespace ifsm::models {

namespace {

ParamSpace binary_params() { return ParamSpace(PointCloud(1, {0.0, 1.0}), Metric::euclidean); }

AffineMaps cantor_maps() { return AffineMaps{{{1.0 / 3.0}, {1.0 / 3.0}}, {{0.0}, {2.0 / 3.0}}}; }

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

IfsmModel cantor(std::vector<double> p) {
  return IfsmModel("cantor", Box::unit(1), Metric::euclidean, binary_params(), cantor_maps(),
                   ConstantWeights{std::move(p)});
}

IfsmModel halving() {
  return IfsmModel("halving", Box::unit(1), Metric::euclidean, ParamSpace(PointCloud(1, {0.0}), Metric::euclidean),
                   AffineMaps{{{0.5}}, {{0.0}}}, ConstantWeights{{1.0}});
}

IfsmModel sierpinski() {
  const std::vector<double> half{0.5, 0.0, 0.0, 0.5};
  AffineMaps maps{{half, half, half}, {{0.0, 0.0}, {0.5, 0.0}, {0.25, 0.5}}};
  ParamSpace params(PointCloud(1, {0.0, 1.0, 2.0}), Metric::euclidean);
  return IfsmModel("sierpinski", Box::unit(2), Metric::euclidean, std::move(params), std::move(maps),
                   ConstantWeights{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}});
}

IfsmModel mixture(double h_scale) {
  if (!(h_scale >= 0.0 && h_scale <= 1.0)) throw ModelError("mixture: h_scale must lie in [0, 1]");
  MixtureWeights w{Expression::parse(shortest(h_scale) + " * x0"), {0.8, 0.2}, {0.2, 0.8}, h_scale};
  return IfsmModel("mixture", Box::unit(1), Metric::euclidean, binary_params(), cantor_maps(), std::move(w));
}

IfsmModel thermodynamic() {
  ThermodynamicWeights w{Expression::parse("0.5 * x0 * x0"), {0.5, 0.5}, 1.0, 0.5};
  return IfsmModel("thermodynamic", Box::unit(1), Metric::euclidean, binary_params(), cantor_maps(), std::move(w));
}

IfsmModel gifs_skew() {
  GifsSkewMaps maps{2, {{0.2, 0.3}, {0.3, 0.2}}, {0.0, 0.5}};
  MixtureWeights w{Expression::parse("x0"), {0.6, 0.4}, {0.4, 0.6}, 1.0};
  return IfsmModel("gifs_skew", Box::unit(2), Metric::max_coord, binary_params(), std::move(maps), std::move(w), true,
                   2);
}

IfsmModel h4_violating() {
  return IfsmModel("h4_violating", Box::unit(1), Metric::euclidean, binary_params(), cantor_maps(),
                   ConstantWeights{{1.0, 0.0}}, false);
}

std::vector<std::string> names() {
  return {"cantor", "halving", "sierpinski", "mixture", "thermodynamic", "gifs_skew", "h4_violating"};
}

IfsmModel by_name(const std::string& name) {
  if (name == "cantor") return cantor();
  if (name == "halving") return halving();
  if (name == "sierpinski") return sierpinski();
  if (name == "mixture") return mixture();
  if (name == "thermodynamic") return thermodynamic();
  if (name == "gifs_skew") return gifs_skew();
  if (name == "h4_violating") return h4_violating();
  throw ModelError("unknown built-in model '" + name + "'");
}

}  // namespace ifsm::models
