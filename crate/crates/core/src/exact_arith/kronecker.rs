use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `(2/b)` for odd `b`, indexed by `b mod 8`.
const TAB2: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

fn mod8(x: &BigInt) -> usize {
    x.mod_floor(&BigInt::from(8)).to_usize().unwrap()
}

/// The Kronecker symbol `(d / a)`.
///
/// Total on `ℤ × ℤ`: `(d/0) = [|d| = 1]`, `(d/-1) = sign d`, and `(d/2)` follows the
/// `±1, ±3 mod 8` rule. Computed by the binary reciprocity recursion.
pub fn kronecker(d: &BigInt, a: &BigInt) -> i8 {
    let mut top = d.clone();
    let mut bot = a.clone();
    if bot.is_zero() {
        return if top.abs().is_one() { 1 } else { 0 };
    }
    if top.is_even() && bot.is_even() {
        return 0;
    }
    let v = bot.trailing_zeros().unwrap_or(0);
    bot >>= v;
    let mut k: i8 = if v % 2 == 0 { 1 } else { TAB2[mod8(&top)] };
    if bot.is_negative() {
        bot = -bot;
        if top.is_negative() {
            k = -k;
        }
    }
    // bot is odd and positive from here on
    loop {
        if top.is_zero() {
            return if bot.is_one() { k } else { 0 };
        }
        let v = top.trailing_zeros().unwrap_or(0);
        top >>= v;
        if v % 2 == 1 {
            k *= TAB2[mod8(&bot)];
        }
        // reciprocity: flip when both are 3 mod 4
        if mod8(&top) % 4 == 3 && mod8(&bot) % 4 == 3 {
            k = -k;
        }
        let r = top.abs();
        top = bot.mod_floor(&r);
        bot = r;
    }
}

pub fn kronecker_i64(d: i64, a: i64) -> i8 {
    kronecker(&BigInt::from(d), &BigInt::from(a))
}
