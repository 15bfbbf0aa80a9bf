use std::f64::consts::PI;

/// Parses an angle given either in plain radians (`1.5708`) or as a multiple
/// of π: `pi`, `-pi`, `0.5pi`, `0.5*pi`, `3pi/2`, `π/4`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = text.to_lowercase();
    let value = match lower.find("pi").map(|i| (i, 2)).or_else(|| lower.find('π').map(|i| (i, 'π'.len_utf8()))) {
        None => lower.parse::<f64>().map_err(|_| bad(s))?,
        Some((at, len)) => {
            let coeff = lower[..at].trim_end_matches('*');
            let coeff = match coeff {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad(s))?,
            };
            let rest = &lower[at + len..];
            let divisor = match rest {
                "" => 1.0,
                r => r
                    .strip_prefix('/')
                    .and_then(|d| d.parse::<f64>().ok())
                    .filter(|d| *d != 0.0)
                    .ok_or_else(|| bad(s))?,
            };
            coeff * PI / divisor
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad(s))
    }
}

fn bad(s: &str) -> String {
    format!("invalid angle '{s}' (use radians or a multiple of pi such as 0.5pi or 3pi/2)")
}
