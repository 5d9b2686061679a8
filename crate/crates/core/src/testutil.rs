//! Fixtures shared by unit tests.

use crate::gazetteer::tests::rec;
use crate::gazetteer::{EntityType::*, Gazetteer};

pub(crate) const RUNNING_EXAMPLE: &str = "<html> <head> <title> Los Angeles Escort Listing </title> </head><body> <p> My name is Charlotte </p>. I come from Mexico and am new in the city of Los Angeles </body> </html>";

pub(crate) const US: u64 = 6252001;
pub(crate) const UK: u64 = 2635167;
pub(crate) const PH: u64 = 1694008;
pub(crate) const MEXICO_COUNTRY: u64 = 3996063;
pub(crate) const CALIFORNIA: u64 = 5332921;
pub(crate) const TEXAS: u64 = 4736286;
pub(crate) const NORTH_CAROLINA: u64 = 4482348;
pub(crate) const ENGLAND: u64 = 6269131;
pub(crate) const PAMPANGA: u64 = 1695848;
pub(crate) const LA_CA: u64 = 5368361;
pub(crate) const LA_TX: u64 = 4707814;
pub(crate) const CHARLOTTE: u64 = 4460243;
pub(crate) const LONDON: u64 = 2643743;
pub(crate) const ANGELES: u64 = 1730737;
pub(crate) const MEXICO_CITY: u64 = 1699980;

pub(crate) fn running_example_gazetteer() -> Gazetteer {
    let mut london = rec(LONDON, "London", City, 8_961_989, Some(ENGLAND), Some(UK));
    london.alternate_names = vec!["The City".into()];
    Gazetteer::from_records(
        vec![
            rec(US, "United States", Country, 310_232_863, None, None),
            rec(UK, "United Kingdom", Country, 62_348_447, None, None),
            rec(PH, "Philippines", Country, 99_900_177, None, None),
            rec(MEXICO_COUNTRY, "Mexico", Country, 112_468_855, None, None),
            rec(CALIFORNIA, "California", State, 37_691_912, None, Some(US)),
            rec(TEXAS, "Texas", State, 25_145_561, None, Some(US)),
            rec(NORTH_CAROLINA, "North Carolina", State, 9_535_483, None, Some(US)),
            rec(ENGLAND, "England", State, 53_012_456, None, Some(UK)),
            rec(PAMPANGA, "Pampanga", State, 2_014_019, None, Some(PH)),
            rec(LA_CA, "Los Angeles", City, 3_971_883, Some(CALIFORNIA), Some(US)),
            rec(LA_TX, "Los Angeles", City, 16_000, Some(TEXAS), Some(US)),
            rec(CHARLOTTE, "Charlotte", City, 827_097, Some(NORTH_CAROLINA), Some(US)),
            rec(ANGELES, "Angeles", City, 299_391, Some(PAMPANGA), Some(PH)),
            rec(MEXICO_CITY, "Mexico", City, 146_851, None, Some(PH)),
            london,
        ],
        0,
    )
    .unwrap()
}
