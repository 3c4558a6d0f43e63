use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::model::Embedding;
use crate::scalar::Real;

/// One atom of a structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom<T> {
    pub serial: i64,
    pub name: String,
    pub element: String,
    pub residue: i64,
    pub chain: char,
    pub pos: Vec3<T>,
}

/// Atoms of one chain, ordered by serial number.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomSet<T> {
    pub atoms: Vec<Atom<T>>,
    /// Where the atoms came from (file name or synthetic generator).
    pub source: String,
    pub warnings: Vec<String>,
}

impl<T: Real> AtomSet<T> {
    pub fn new(atoms: Vec<Atom<T>>, source: impl Into<String>) -> Self {
        AtomSet { atoms, source: source.into(), warnings: Vec::new() }
    }

    /// Atoms with element `C` at the given positions, serials from 1.
    pub fn from_points(points: Vec<Vec3<T>>, element: &str, source: impl Into<String>) -> Self {
        let atoms = points
            .into_iter()
            .enumerate()
            .map(|(i, pos)| Atom {
                serial: i as i64 + 1,
                name: element.to_string(),
                element: element.to_string(),
                residue: i as i64 + 1,
                chain: 'A',
                pos,
            })
            .collect();
        AtomSet::new(atoms, source)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3<T>> {
        self.atoms.iter().map(|a| a.pos).collect()
    }

    pub fn elements(&self) -> Vec<String> {
        self.atoms.iter().map(|a| a.element.clone()).collect()
    }

    pub fn embedding(&self) -> Embedding<T> {
        Embedding::new(self.positions())
    }
}

fn columns(line: &str, from: usize, to: usize) -> &str {
    // 1-based inclusive column range; PDB lines are ASCII.
    let len = line.len();
    if from > len {
        return "";
    }
    line.get(from - 1..to.min(len)).unwrap_or("")
}

fn element_from_name(name: &str) -> String {
    name.chars()
        .find(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_uppercase().to_string())
        .unwrap_or_default()
}

fn normalize_element(raw: &str) -> String {
    let mut chars = raw.trim().chars().filter(|c| c.is_ascii_alphabetic());
    match (chars.next(), chars.next()) {
        (Some(a), Some(b)) => format!("{}{}", a.to_ascii_uppercase(), b.to_ascii_lowercase()),
        (Some(a), None) => a.to_ascii_uppercase().to_string(),
        _ => String::new(),
    }
}

/// Reads `ATOM` records of the first chain (and first model) from PDB text.
///
/// `HETATM`, `ANISOU` and every other record type are ignored. For atoms with
/// alternate locations only the first location indicator seen is kept.
pub fn parse_pdb_atoms<T: Real>(text: &str) -> Result<AtomSet<T>> {
    let mut atoms = Vec::new();
    let mut chain: Option<char> = None;
    let mut alt: Option<char> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.starts_with("ENDMDL") {
            break;
        }
        if !line.starts_with("ATOM") || columns(line, 1, 6).trim_end() != "ATOM" {
            continue;
        }
        let c = columns(line, 22, 22).chars().next().unwrap_or(' ');
        match chain {
            None => chain = Some(c),
            Some(first) if first != c => continue,
            _ => {}
        }
        let altloc = columns(line, 17, 17).chars().next().unwrap_or(' ');
        if altloc != ' ' {
            match alt {
                None => alt = Some(altloc),
                Some(a) if a != altloc => continue,
                _ => {}
            }
        }
        let coord = |from, to, axis: &str| -> Result<T> {
            let field = columns(line, from, to).trim();
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(T::lit)
                .ok_or_else(|| Error::parse(lineno, format!("malformed {axis} coordinate '{field}'")))
        };
        let pos = [coord(31, 38, "x")?, coord(39, 46, "y")?, coord(47, 54, "z")?];
        let name = columns(line, 13, 16).trim().to_string();
        let mut element = normalize_element(columns(line, 77, 78));
        if element.is_empty() {
            element = element_from_name(&name);
        }
        let serial = columns(line, 7, 11).trim().parse::<i64>().unwrap_or(atoms.len() as i64 + 1);
        let residue = columns(line, 23, 26).trim().parse::<i64>().unwrap_or(0);
        atoms.push(Atom { serial, name, element, residue, chain: c, pos });
    }
    atoms.sort_by_key(|a| a.serial);
    let mut set = AtomSet::new(atoms, "pdb");
    if set.is_empty() {
        set.warnings.push("no ATOM records found".to_string());
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom_line(record: &str, serial: usize, name: &str, chain: char, x: f64, y: f64, z: f64, el: &str) -> String {
        format!(
            "{record:<6}{serial:>5} {name:<4} ALA {chain}{res:>4}    {x:>8.3}{y:>8.3}{z:>8.3}  1.00  0.00          {el:>2}",
            res = 1
        )
    }

    #[test]
    fn first_chain_only() {
        let text = [
            atom_line("ATOM", 1, "N", 'A', 1.0, 2.0, 3.0, "N"),
            atom_line("ATOM", 2, "CA", 'A', 2.0, 2.0, 3.0, "C"),
            atom_line("HETATM", 3, "O", 'A', 0.0, 0.0, 0.0, "O"),
            atom_line("ATOM", 4, "N", 'B', 9.0, 9.0, 9.0, "N"),
        ]
        .join("\n");
        let set = parse_pdb_atoms::<f64>(&text).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.atoms[1].element, "C");
        assert_eq!(set.atoms[0].pos, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn hetatm_only_warns() {
        let text = atom_line("HETATM", 1, "O", 'A', 0.0, 0.0, 0.0, "O");
        let set = parse_pdb_atoms::<f64>(&text).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.warnings.len(), 1);
    }

    #[test]
    fn bad_coordinate_names_line() {
        let mut bad = atom_line("ATOM", 1, "N", 'A', 1.0, 2.0, 3.0, "N");
        bad.replace_range(30..38, "  abc.de");
        let text = format!("HEADER x\n{bad}");
        match parse_pdb_atoms::<f64>(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn element_fallback_to_name() {
        let line = atom_line("ATOM", 1, "CB", 'A', 1.0, 2.0, 3.0, "");
        let set = parse_pdb_atoms::<f64>(line.trim_end()).unwrap();
        assert_eq!(set.atoms[0].element, "C");
    }
}
