use super::{BinOp, Expr, Func, Program, Reduce, Var};
use crate::acquisition::{finish_max, finish_min, AfError, AfInput, AfOutput};
use crate::stats::{argmax_skip_nan, argmin_skip_nan, norm_cdf, norm_pdf, truncnorm_cdf};

#[derive(Clone, Debug)]
enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Value {
    fn map(self, f: impl Fn(f64) -> f64) -> Value {
        match self {
            Value::Scalar(x) => Value::Scalar(f(x)),
            Value::Vector(mut v) => {
                v.iter_mut().for_each(|x| *x = f(*x));
                Value::Vector(v)
            }
        }
    }

    fn into_vector(self, n: usize) -> Vec<f64> {
        match self {
            Value::Scalar(x) => vec![x; n],
            Value::Vector(v) => v,
        }
    }

    fn scalar(self, what: &str) -> Result<f64, AfError> {
        match self {
            Value::Scalar(x) => Ok(x),
            Value::Vector(_) => Err(AfError::InvalidProgram(format!("{what} must be a scalar"))),
        }
    }
}

fn zip(a: Value, b: Value, f: impl Fn(f64, f64) -> f64) -> Value {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(f(x, y)),
        (Value::Vector(mut v), Value::Scalar(y)) => {
            v.iter_mut().for_each(|x| *x = f(*x, y));
            Value::Vector(v)
        }
        (Value::Scalar(x), Value::Vector(mut v)) => {
            v.iter_mut().for_each(|y| *y = f(x, *y));
            Value::Vector(v)
        }
        (Value::Vector(mut v), Value::Vector(w)) => {
            v.iter_mut().zip(w).for_each(|(x, y)| *x = f(*x, y));
            Value::Vector(v)
        }
    }
}

fn zip3(a: Value, b: Value, c: Value, f: impl Fn(f64, f64, f64) -> f64, n: usize) -> Value {
    if let (Value::Scalar(x), Value::Scalar(y), Value::Scalar(z)) = (&a, &b, &c) {
        return Value::Scalar(f(*x, *y, *z));
    }
    let (a, b, c) = (a.into_vector(n), b.into_vector(n), c.into_vector(n));
    Value::Vector((0..n).map(|i| f(a[i], b[i], c[i])).collect())
}

/// NaN for `x / 0`, otherwise IEEE division.
fn div(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        f64::NAN
    } else {
        x / y
    }
}

fn min_nan(x: f64, y: f64) -> f64 {
    if x.is_nan() || y.is_nan() {
        f64::NAN
    } else {
        x.min(y)
    }
}

fn max_nan(x: f64, y: f64) -> f64 {
    if x.is_nan() || y.is_nan() {
        f64::NAN
    } else {
        x.max(y)
    }
}

fn index_arg(v: f64, n: usize, what: &str, inclusive: bool) -> Result<usize, AfError> {
    let limit = if inclusive { n as f64 } else { n as f64 - 1.0 };
    if !v.is_finite() || v < 0.0 || v.floor() > limit {
        return Err(AfError::InvalidProgram(format!("{what} {v} is out of bounds for {n} points")));
    }
    Ok(v.floor() as usize)
}

struct Env<'a> {
    input: &'a AfInput,
    bindings: Vec<(&'a str, Value)>,
}

impl Env<'_> {
    fn n(&self) -> usize {
        self.input.len()
    }

    fn eval(&self, e: &Expr) -> Result<Value, AfError> {
        Ok(match e {
            Expr::Var(Var::Mean) => Value::Vector(self.input.mean.clone()),
            Expr::Var(Var::Var) => Value::Vector(self.input.variance.clone()),
            Expr::Var(Var::Incumbent) => Value::Scalar(self.input.incumbent),
            Expr::Var(Var::Beta) => Value::Scalar(self.input.beta),
            Expr::Var(Var::NPoints) => Value::Scalar(self.n() as f64),
            Expr::Lit(v) => Value::Scalar(*v),
            Expr::Ident(name) => self
                .bindings
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| AfError::InvalidProgram(format!("unbound `{name}`")))?,
            Expr::Neg(a) => self.eval(a)?.map(|x| -x),
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => zip(a, b, |x, y| x + y),
                    BinOp::Sub => zip(a, b, |x, y| x - y),
                    BinOp::Mul => zip(a, b, |x, y| x * y),
                    BinOp::Div => zip(a, b, div),
                    BinOp::Pow => zip(a, b, f64::powf),
                }
            }
            Expr::Call(f, args) => self.call(*f, args)?,
        })
    }

    fn call(&self, f: Func, args: &[Expr]) -> Result<Value, AfError> {
        let n = self.n();
        let mut vals = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?.into_iter();
        let mut next = || vals.next().expect("arity checked at parse time");
        Ok(match f {
            Func::Abs => next().map(f64::abs),
            Func::Sqrt => next().map(f64::sqrt),
            Func::Exp => next().map(f64::exp),
            Func::Log => next().map(f64::ln),
            Func::NormCdf => next().map(norm_cdf),
            Func::NormPdf => next().map(norm_pdf),
            Func::IMin | Func::IMax => {
                let v = next().into_vector(n);
                let i = if f == Func::IMin { argmin_skip_nan(&v) } else { argmax_skip_nan(&v) };
                Value::Scalar(i.map_or(f64::NAN, |i| i as f64))
            }
            Func::Min => zip(next(), next(), min_nan),
            Func::Max => zip(next(), next(), max_nan),
            Func::NormCdfLoc => zip(next(), next(), |x, loc| norm_cdf(x - loc)),
            Func::TruncNormCdf => {
                let (x, lo, hi) = (next(), next(), next());
                zip3(x, lo, hi, truncnorm_cdf, n)
            }
            Func::SetAt => {
                let mut v = next().into_vector(n);
                let i = index_arg(next().scalar("set_at index")?, n, "set_at index", false)?;
                v[i] = match next() {
                    Value::Scalar(x) => x,
                    Value::Vector(w) => w[i],
                };
                Value::Vector(v)
            }
            Func::ZeroPrefix => {
                let mut v = next().into_vector(n);
                let k = index_arg(next().scalar("zero_prefix count")?, n, "zero_prefix count", true)?;
                v[..k].iter_mut().for_each(|x| *x = 0.0);
                Value::Vector(v)
            }
        })
    }
}

impl Program {
    /// Evaluates the program on `input` (variance floored first).
    pub fn evaluate(&self, input: &AfInput) -> Result<AfOutput, AfError> {
        input.validate()?;
        let input = input.floored();
        let mut env = Env { input: &input, bindings: Vec::with_capacity(self.lets.len()) };
        for (name, e) in &self.lets {
            let v = env.eval(e)?;
            env.bindings.push((name.as_str(), v));
        }
        let values = env.eval(&self.body)?.into_vector(input.len());
        match self.reduce {
            Reduce::Argmax => finish_max(values),
            Reduce::Argmin => finish_min(values),
        }
    }

    pub fn select(&self, input: &AfInput) -> Result<usize, AfError> {
        self.evaluate(input).map(|o| o.index)
    }
}
