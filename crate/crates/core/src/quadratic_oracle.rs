//! Brute-force classification of diagonal quadratic forms over odd prime
//! fields, by counting representations of every field element. This is the
//! independent oracle the Grothendieck-Witt and Witt backends are checked
//! against; nothing here consults the rank/discriminant tables.

/// Number of solutions of `sum a_i x_i^2 = c` for each `c` in `0..q`,
/// enumerated over the whole space `F_q^r`.
pub fn representation_counts(q: u64, form: &[u64]) -> Vec<u64> {
    let squares: Vec<u64> = (0..q).map(|x| x * x % q).collect();
    let mut counts = vec![0u64; q as usize];
    let r = form.len();
    let mut point = vec![0u64; r];
    loop {
        let mut value = 0u64;
        for (i, &a) in form.iter().enumerate() {
            value = (value + a % q * squares[point[i] as usize]) % q;
        }
        counts[value as usize] += 1;
        let mut i = 0;
        loop {
            if i == r {
                return counts;
            }
            point[i] += 1;
            if point[i] < q {
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}

/// Isometry test: same rank and identical representation counts. Over a
/// finite field the counts of a nondegenerate form determine its isometry
/// class, which is what the classification test below verifies.
pub fn isometric(q: u64, a: &[u64], b: &[u64]) -> bool {
    a.len() == b.len() && representation_counts(q, a) == representation_counts(q, b)
}

/// Witt equivalence: pad the shorter form with hyperbolic planes `<1, -1>`
/// and compare isometry classes. Ranks of different parity are never
/// equivalent.
pub fn witt_equivalent(q: u64, a: &[u64], b: &[u64]) -> bool {
    if (a.len() + b.len()) % 2 != 0 {
        return false;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    while a.len() < b.len() {
        a.push(1);
        a.push(q - 1);
    }
    while b.len() < a.len() {
        b.push(1);
        b.push(q - 1);
    }
    isometric(q, &a, &b)
}

fn is_square(q: u64, a: u64) -> bool {
    (0..q).any(|x| x * x % q == a % q)
}

/// Discriminant square class of a diagonal form: `true` means nonsquare.
pub fn disc_nonsquare(q: u64, form: &[u64]) -> bool {
    let mut d = 1u64;
    for &a in form {
        d = d * (a % q) % q;
    }
    !is_square(q, d)
}

fn forms_of_rank(q: u64, rank: usize) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..rank {
        let mut next = Vec::new();
        for f in &out {
            for a in 1..q {
                let mut g = f.clone();
                g.push(a);
                next.push(g);
            }
        }
        out = next;
    }
    out
}

/// Checks that, for every rank up to `max_rank`, grouping diagonal forms by
/// representation counts coincides with grouping them by (rank, discriminant
/// class). This is the statement that the backend's `(rank, disc)` tables are
/// a complete isometry invariant.
pub fn counts_classify_by_rank_and_disc(q: u64, max_rank: usize) -> bool {
    for rank in 1..=max_rank {
        let forms = forms_of_rank(q, rank);
        let data: Vec<(bool, Vec<u64>)> = forms
            .iter()
            .map(|f| (disc_nonsquare(q, f), representation_counts(q, f)))
            .collect();
        for i in 0..data.len() {
            for j in i + 1..data.len() {
                if (data[i].0 == data[j].0) != (data[i].1 == data[j].1) {
                    return false;
                }
            }
        }
    }
    true
}

/// `<a, -a>` is hyperbolic for every unit `a`.
pub fn hyperbolic_planes_agree(q: u64) -> bool {
    (1..q).all(|a| isometric(q, &[a, q - a], &[1, q - 1]))
}

/// The square of the fundamental ideal vanishes: every `<1, -a, -b, ab>` is
/// Witt equivalent to zero. Checking one representative per square-class pair
/// suffices since the form only depends on the classes of `a` and `b`.
pub fn fundamental_ideal_square_vanishes(q: u64) -> bool {
    let n = (2..q).find(|&n| !is_square(q, n)).expect("nonsquare exists");
    [1, n].iter().all(|&a| {
        [1, n].iter().all(|&b| {
            let form = [1, (q - a) % q, (q - b) % q, a * b % q];
            witt_equivalent(q, &form, &[])
        })
    })
}

/// Derives the Witt group structure from scratch: distinct classes among all
/// forms of rank at most three, and whether some class has additive order
/// four.
pub fn witt_group_structure(q: u64) -> (usize, bool) {
    let mut reps: Vec<Vec<u64>> = Vec::new();
    for rank in 0..=3 {
        for f in forms_of_rank(q, rank) {
            if !reps.iter().any(|r| witt_equivalent(q, r, &f)) {
                reps.push(f);
            }
        }
    }
    let cyclic = reps.iter().any(|r| {
        let mut doubled = r.clone();
        doubled.extend_from_slice(r);
        !witt_equivalent(q, &doubled, &[])
    });
    (reps.len(), cyclic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_of_the_unit_form() {
        // x^2 over F_7: 0 once, each square twice.
        let counts = representation_counts(7, &[1]);
        assert_eq!(counts, vec![1, 2, 2, 0, 2, 0, 0]);
    }

    #[test]
    fn hyperbolic_and_classification_small() {
        for q in [3, 5, 7] {
            assert!(hyperbolic_planes_agree(q));
            assert!(counts_classify_by_rank_and_disc(q, 2));
        }
    }

    #[test]
    fn witt_structures() {
        let (order, cyclic) = witt_group_structure(3);
        assert_eq!((order, cyclic), (4, true));
        let (order, cyclic) = witt_group_structure(5);
        assert_eq!((order, cyclic), (4, false));
    }
}
