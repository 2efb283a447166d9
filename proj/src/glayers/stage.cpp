#include "glayers/stage.hpp"

#include <utility>
#include <vector>

namespace glayers {

Stage make_stage(std::string name, TapedFn fn) {
  Stage s;
  s.name = std::move(name);
  s.apply = [fn](const Tensor& x) {
    ad::Tape t;
    return fn(t.constant(x)).value();
  };
  s.vjp = [fn](const Tensor& x, const Tensor&, const Tensor& cot) {
    ad::Tape t;
    ad::Var in = t.leaf(x);
    ad::Var out = fn(in);
    return t.backward(out, cot)[in];
  };
  return s;
}

Stage compose(std::string name, std::vector<Stage> stages) {
  Stage s;
  s.name = std::move(name);
  s.apply = [stages](const Tensor& x) {
    Tensor y = x;
    for (const Stage& st : stages) y = st.apply(y);
    return y;
  };
  s.vjp = [stages](const Tensor& x, const Tensor&, const Tensor& cot) {
    std::vector<Tensor> values{x};
    for (const Stage& st : stages) values.push_back(st.apply(values.back()));
    Tensor g = cot;
    for (std::size_t i = stages.size(); i-- > 0;) g = stages[i].vjp(values[i], values[i + 1], g);
    return g;
  };
  return s;
}

}  // namespace glayers
