//! Angle arguments.
//!
//! `pi/3`, `2pi/3`, `2*pi/3`, `π/2` and degree forms like `60deg` are
//! angles; a bare number (`1/2`, `-0.25`, `0`) is the cosine itself.

use capsdp::scalar::{int, parse_rational, rat, rational_to_string, Rational};
use capsdp::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Angle {
    pub text: String,
    pub cos: Rational,
    /// False when the cosine had to be rounded to `f64`.
    pub exact: bool,
}

impl Angle {
    pub fn note(&self) -> Option<String> {
        (!self.exact).then(|| {
            format!(
                "cos({}) is irrational; using the f64 value {} = {}",
                self.text,
                self.cos.to_f64(),
                rational_to_string(&self.cos)
            )
        })
    }
}

/// `cos(r pi)` for the rational multiples with rational cosine.
fn exact_cos(r: &Rational) -> Option<Rational> {
    let two = int(2);
    let mut r = r % &two;
    if r < int(0) {
        r += &two;
    }
    if r > int(1) {
        r = two - r;
    }
    [
        (int(0), int(1)),
        (rat(1, 3), rat(1, 2)),
        (rat(1, 2), int(0)),
        (rat(2, 3), rat(-1, 2)),
        (int(1), int(-1)),
    ]
    .into_iter()
    .find(|(x, _)| *x == r)
    .map(|(_, c)| c)
}

fn from_multiple(text: &str, r: Rational) -> Angle {
    match exact_cos(&r) {
        Some(cos) => Angle {
            text: text.into(),
            cos,
            exact: true,
        },
        None => {
            let c = (r.to_f64() * std::f64::consts::PI).cos();
            Angle {
                text: text.into(),
                cos: c.to_rational().unwrap_or_else(|| int(0)),
                exact: false,
            }
        }
    }
}

pub fn parse_angle(s: &str) -> Result<Angle, String> {
    let text = s.trim();
    let norm = text.replace('π', "pi").replace(' ', "");
    if let Some(deg) = norm.strip_suffix("deg") {
        let d = parse_rational(deg).ok_or_else(|| format!("bad angle {text:?}"))?;
        return Ok(from_multiple(text, d / int(180)));
    }
    if let Some((coef, rest)) = norm.split_once("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let num = match coef {
            "" => int(1),
            "-" => int(-1),
            c => parse_rational(c).ok_or_else(|| format!("bad angle {text:?}"))?,
        };
        let den = match rest {
            "" => int(1),
            r => r
                .strip_prefix('/')
                .and_then(parse_rational)
                .filter(|d| *d != int(0))
                .ok_or_else(|| format!("bad angle {text:?}"))?,
        };
        return Ok(from_multiple(text, num / den));
    }
    let cos = parse_rational(&norm).ok_or_else(|| format!("bad angle or cosine {text:?}"))?;
    if cos < int(-1) || cos > int(1) {
        return Err(format!("cosine {text} is outside [-1, 1]"));
    }
    Ok(Angle {
        text: text.into(),
        cos,
        exact: true,
    })
}

/// `pi/3`-style name of the angle with cosine `c`, or radians.
pub fn angle_name(c: &Rational) -> String {
    let named = [
        (int(1), "0"),
        (rat(1, 2), "π/3"),
        (int(0), "π/2"),
        (rat(-1, 2), "2π/3"),
        (int(-1), "π"),
    ];
    match named.iter().find(|(x, _)| x == c) {
        Some((_, name)) => (*name).to_string(),
        None => format!("{:.6} rad", c.to_f64().clamp(-1.0, 1.0).acos()),
    }
}
