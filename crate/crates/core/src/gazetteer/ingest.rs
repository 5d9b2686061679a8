use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use log::warn;

use super::{EntityType, Gazetteer, GazetteerRecord, GeonameId};
use crate::{Error, Result};

pub const MIN_CITY_POPULATION: u64 = 15_000;

const CITY_COLUMNS: usize = 19;
const ADMIN1_COLUMNS: usize = 4;
const COUNTRY_MIN_COLUMNS: usize = 17;
const ALTERNATE_MIN_COLUMNS: usize = 4;

/// Pseudo-languages in `alternateNames` that hold codes and links, not names.
const NON_NAME_LANGUAGES: &[&str] = &["link", "post", "iata", "icao", "faac", "fr_1793", "wkdt", "unlc", "tcid"];

/// Paths of the Geonames dump files.
#[derive(Debug, Clone)]
pub struct GeonamesFiles {
    /// `cities15000.txt`-style main table, 19 columns.
    pub cities: PathBuf,
    /// `admin1CodesASCII.txt`: `CC.A1`, name, asciiname, geonameid.
    pub admin1: PathBuf,
    /// `countryInfo.txt`, `#` comment lines then at least 17 columns.
    pub countries: PathBuf,
    /// Optional `alternateNamesV2.txt`.
    pub alternates: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub include_alternates: bool,
    pub min_city_population: u64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            include_alternates: true,
            min_city_population: MIN_CITY_POPULATION,
        }
    }
}

fn for_each_row(path: &Path, mut f: impl FnMut(usize, &[&str]) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        f(i + 1, &cols)?;
    }
    Ok(())
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

fn parse_id(path: &Path, line: usize, s: &str) -> Result<GeonameId> {
    match s.trim().parse::<u64>() {
        Ok(v) if v > 0 => Ok(GeonameId(v)),
        _ => Err(malformed(path, line, format!("invalid geonames id {s:?}"))),
    }
}

fn parse_population(path: &Path, line: usize, s: &str) -> Result<u64> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(0);
    }
    s.parse::<u64>()
        .map_err(|_| malformed(path, line, format!("invalid population {s:?}")))
}

fn check_columns(path: &Path, line: usize, cols: &[&str], want: usize, exact: bool) -> Result<()> {
    let ok = if exact { cols.len() == want } else { cols.len() >= want };
    if ok {
        Ok(())
    } else {
        Err(malformed(
            path,
            line,
            format!("expected {}{want} columns, found {}", if exact { "" } else { "at least " }, cols.len()),
        ))
    }
}

fn ascii_variant(name: &str, ascii: &str) -> String {
    if ascii == name {
        String::new()
    } else {
        ascii.to_owned()
    }
}

/// Build a gazetteer from Geonames dumps.
///
/// Countries and first-level divisions are kept whole; cities are kept when
/// their population reaches `min_city_population`. Parent links go through
/// the country code and `(country code, admin1 code)`; codes that do not
/// resolve leave the link unset and bump the warning counter.
pub fn ingest(files: &GeonamesFiles, opts: &IngestOptions) -> Result<Gazetteer> {
    let mut records: BTreeMap<GeonameId, GazetteerRecord> = BTreeMap::new();
    let mut country_by_code: HashMap<String, GeonameId> = HashMap::new();
    let mut state_by_code: HashMap<(String, String), GeonameId> = HashMap::new();
    let mut warnings = 0usize;

    let insert = |records: &mut BTreeMap<GeonameId, GazetteerRecord>, rec: GazetteerRecord| -> Result<()> {
        let id = rec.geonames_id;
        if records.insert(id, rec).is_some() {
            return Err(Error::DuplicateId(id.0));
        }
        Ok(())
    };

    let path = &files.countries;
    for_each_row(path, |line, cols| {
        if cols[0].starts_with('#') {
            return Ok(());
        }
        check_columns(path, line, cols, COUNTRY_MIN_COLUMNS, false)?;
        let id = parse_id(path, line, cols[16])?;
        let code = cols[0].trim().to_owned();
        country_by_code.insert(code.clone(), id);
        insert(
            &mut records,
            GazetteerRecord {
                geonames_id: id,
                canonical_name: cols[4].trim().to_owned(),
                ascii_name: String::new(),
                alternate_names: vec![],
                entity_type: EntityType::Country,
                population: parse_population(path, line, cols[7])?,
                admin1_code: String::new(),
                country_code: code,
                parent_state_id: None,
                parent_country_id: None,
            },
        )
    })?;

    let path = &files.admin1;
    for_each_row(path, |line, cols| {
        check_columns(path, line, cols, ADMIN1_COLUMNS, true)?;
        let Some((cc, a1)) = cols[0].split_once('.') else {
            return Err(malformed(path, line, format!("admin1 code {:?} is not CC.A1", cols[0])));
        };
        let id = parse_id(path, line, cols[3])?;
        let parent_country_id = country_by_code.get(cc).copied();
        if parent_country_id.is_none() {
            warnings += 1;
            warn!("{}:{line}: unknown country code {cc:?}", path.display());
        }
        state_by_code.insert((cc.to_owned(), a1.to_owned()), id);
        insert(
            &mut records,
            GazetteerRecord {
                geonames_id: id,
                canonical_name: cols[1].trim().to_owned(),
                ascii_name: ascii_variant(cols[1].trim(), cols[2].trim()),
                alternate_names: vec![],
                entity_type: EntityType::State,
                population: 0,
                admin1_code: a1.to_owned(),
                country_code: cc.to_owned(),
                parent_state_id: None,
                parent_country_id,
            },
        )
    })?;

    let path = &files.cities;
    for_each_row(path, |line, cols| {
        check_columns(path, line, cols, CITY_COLUMNS, true)?;
        let id = parse_id(path, line, cols[0])?;
        let population = parse_population(path, line, cols[14])?;
        let feature_class = cols[6].trim();
        if population < opts.min_city_population || !(feature_class.is_empty() || feature_class == "P") {
            return Ok(());
        }
        let cc = cols[8].trim();
        let a1 = cols[10].trim();
        let parent_country_id = country_by_code.get(cc).copied();
        if parent_country_id.is_none() {
            warnings += 1;
            warn!("{}:{line}: unknown country code {cc:?}", path.display());
        }
        let parent_state_id = if a1.is_empty() {
            None
        } else {
            let found = state_by_code.get(&(cc.to_owned(), a1.to_owned())).copied();
            if found.is_none() {
                warnings += 1;
                warn!("{}:{line}: unknown admin1 code {cc}.{a1}", path.display());
            }
            found
        };
        let alternate_names = if opts.include_alternates {
            cols[3]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect()
        } else {
            vec![]
        };
        insert(
            &mut records,
            GazetteerRecord {
                geonames_id: id,
                canonical_name: cols[1].trim().to_owned(),
                ascii_name: ascii_variant(cols[1].trim(), cols[2].trim()),
                alternate_names,
                entity_type: EntityType::City,
                population,
                admin1_code: a1.to_owned(),
                country_code: cc.to_owned(),
                parent_state_id,
                parent_country_id,
            },
        )
    })?;

    if opts.include_alternates {
        if let Some(path) = &files.alternates {
            for_each_row(path, |line, cols| {
                check_columns(path, line, cols, ALTERNATE_MIN_COLUMNS, false)?;
                let id = parse_id(path, line, cols[1])?;
                let lang = cols[2].trim();
                let name = cols[3].trim();
                if name.is_empty() || NON_NAME_LANGUAGES.contains(&lang) {
                    return Ok(());
                }
                if let Some(rec) = records.get_mut(&id) {
                    if !rec.alternate_names.iter().any(|n| n == name) {
                        rec.alternate_names.push(name.to_owned());
                    }
                }
                Ok(())
            })?;
        }
    }

    Gazetteer::from_records(records.into_values(), warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    pub(crate) struct Fixture {
        pub dir: tempfile::TempDir,
        pub files: GeonamesFiles,
    }

    fn city_row(id: u64, name: &str, alts: &str, cc: &str, a1: &str, pop: u64) -> String {
        let mut c = vec![""; 19];
        let id_s = id.to_string();
        let pop_s = pop.to_string();
        c[0] = &id_s;
        c[1] = name;
        c[2] = name;
        c[3] = alts;
        c[4] = "0.0";
        c[5] = "0.0";
        c[6] = "P";
        c[7] = "PPL";
        c[8] = cc;
        c[10] = a1;
        c[14] = &pop_s;
        c[17] = "UTC";
        c[18] = "2020-01-01";
        c.join("\t")
    }

    fn country_row(cc: &str, name: &str, pop: u64, id: u64) -> String {
        let mut c = vec![String::new(); 19];
        c[0] = cc.into();
        c[1] = format!("{cc}X");
        c[4] = name.into();
        c[7] = pop.to_string();
        c[16] = id.to_string();
        c.join("\t")
    }

    fn write(dir: &Path, name: &str, lines: &[String]) -> PathBuf {
        let p = dir.join(name);
        let mut f = File::create(&p).unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        p
    }

    /// Twelve data rows over three countries.
    pub(crate) fn fixture() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let countries = write(
            dir.path(),
            "countryInfo.txt",
            &[
                "#ISO\tISO3\tISO-Numeric\tfips\tCountry\tCapital\tArea\tPopulation".to_owned(),
                "# comment".to_owned(),
                country_row("US", "United States", 310_232_863, 6252001),
                country_row("GB", "United Kingdom", 62_348_447, 2635167),
                country_row("PH", "Philippines", 99_900_177, 1694008),
            ],
        );
        let admin1 = write(
            dir.path(),
            "admin1CodesASCII.txt",
            &[
                "US.CA\tCalifornia\tCalifornia\t5332921".to_owned(),
                "US.TX\tTexas\tTexas\t4736286".to_owned(),
                "GB.ENG\tEngland\tEngland\t6269131".to_owned(),
            ],
        );
        let cities = write(
            dir.path(),
            "cities.txt",
            &[
                city_row(5368361, "Los Angeles", "LA", "US", "CA", 3_971_883),
                city_row(4700000, "Los Angeles", "", "US", "TX", 16_000),
                city_row(2643743, "London", "The City", "GB", "ENG", 8_961_989),
                city_row(1730737, "Angeles", "", "PH", "ZZ", 299_391),
                city_row(9999999, "Smallville", "", "US", "CA", 14_999),
                city_row(1111111, "Gotham", "", "XX", "", 20_000),
            ],
        );
        let alternates = write(
            dir.path(),
            "alternateNames.txt",
            &[
                "1\t5332921\ten\tGolden State\t\t\t1\t".to_owned(),
                "2\t5332921\tabbr\tCA\t\t\t\t".to_owned(),
                "3\t5368361\tlink\thttps://en.wikipedia.org/wiki/Los_Angeles\t\t\t\t".to_owned(),
                "4\t9999999\ten\tSmall Town\t\t\t\t".to_owned(),
            ],
        );
        Fixture {
            files: GeonamesFiles {
                cities,
                admin1,
                countries,
                alternates: Some(alternates),
            },
            dir,
        }
    }

    #[test]
    fn ingest_fixture() {
        let fx = fixture();
        let g = ingest(&fx.files, &IngestOptions::default()).unwrap();
        assert_eq!(g.count(EntityType::Country), 3);
        assert_eq!(g.count(EntityType::State), 3);
        // Smallville is below the population floor.
        assert_eq!(g.count(EntityType::City), 5);
        assert!(g.get(GeonameId(9999999)).is_none());
        // Unknown admin1 ZZ for Angeles and unknown country XX for Gotham.
        assert_eq!(g.warnings(), 2);

        let la = g.get(GeonameId(5368361)).unwrap();
        let state = g.get(la.parent_state_id.unwrap()).unwrap();
        let country = g.get(la.parent_country_id.unwrap()).unwrap();
        assert_eq!(state.canonical_name, "California");
        assert_eq!(country.canonical_name, "United States");
        let angeles = g.get(GeonameId(1730737)).unwrap();
        assert_eq!(angeles.parent_state_id, None);
        assert_eq!(angeles.parent_country_id, Some(GeonameId(1694008)));

        // Hand count of index keys: 3 countries, 3 states, cities
        // {los angeles, la, london, the city, angeles, gotham}, state
        // alternates {golden state, ca}. The wiki link is skipped.
        let keys: Vec<&str> = g.name_index().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            vec![
                "angeles", "ca", "california", "england", "golden state", "gotham", "la", "london",
                "los angeles", "philippines", "texas", "the city", "united kingdom", "united states",
            ]
        );
        assert_eq!(g.name_index()["los angeles"].len(), 2);
        let total: usize = g.name_index().values().map(|s| s.len()).sum();
        assert_eq!(total, 15);
    }

    #[test]
    fn without_alternates() {
        let fx = fixture();
        let opts = IngestOptions {
            include_alternates: false,
            ..Default::default()
        };
        let g = ingest(&fx.files, &opts).unwrap();
        assert!(!g.name_index().contains_key("the city"));
        assert!(!g.name_index().contains_key("golden state"));
        assert_eq!(g.name_index().len(), 10);
    }

    #[test]
    fn empty_cities_file() {
        let fx = fixture();
        let empty = write(fx.dir.path(), "empty.txt", &[]);
        let files = GeonamesFiles {
            cities: empty,
            ..fx.files.clone()
        };
        let g = ingest(&files, &IngestOptions::default()).unwrap();
        assert_eq!(g.count(EntityType::City), 0);
        assert_eq!(g.count(EntityType::Country), 3);
    }

    #[test]
    fn wrong_column_count_names_file_and_line() {
        let fx = fixture();
        let bad = write(
            fx.dir.path(),
            "bad_admin1.txt",
            &["US.CA\tCalifornia\tCalifornia\t5332921".to_owned(), "US.TX\tTexas\t4736286".to_owned()],
        );
        let files = GeonamesFiles {
            admin1: bad,
            ..fx.files.clone()
        };
        let err = ingest(&files, &IngestOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad_admin1.txt:2"), "{msg}");
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
    }

    #[test]
    fn idempotent() {
        let fx = fixture();
        let a = ingest(&fx.files, &IngestOptions::default()).unwrap();
        let b = ingest(&fx.files, &IngestOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reachable_cities_meet_population_floor() {
        let fx = fixture();
        let g = ingest(&fx.files, &IngestOptions::default()).unwrap();
        for ids in g.name_index().values() {
            for m in ids {
                let r = g.get(m.id).unwrap();
                if r.entity_type == EntityType::City {
                    assert!(r.population >= MIN_CITY_POPULATION);
                }
            }
        }
    }
}
