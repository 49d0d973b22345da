//! Range-variant asymmetric numeral systems (rANS) with a stack interface.
//!
//! A [`Message`] holds the compressed state. [`Message::push`] encodes a
//! symbol onto it and [`Message::pop`] decodes the most recently pushed
//! symbol back off, so the last symbol in is the first one out.
//! [`stream::encode`] and [`stream::decode`] handle whole sequences over a
//! [`SymbolModel`], and [`container`] defines the on-disk format.
//!
//! ```
//! use stack_rans::{stream, CodecParams, QuantizedDistribution, StaticModel};
//!
//! let dist = QuantizedDistribution::quantize_counts(&[5, 1, 2], 16).unwrap();
//! let data = [0, 0, 2, 1, 0];
//! let params = CodecParams::default();
//!
//! let (message, report) = stream::encode(&data, &mut StaticModel::new(dist.clone()), params).unwrap();
//! assert!(stream::verify_bound(&report).passed());
//!
//! let decoded = stream::decode(message, data.len(), &mut StaticModel::new(dist)).unwrap();
//! assert_eq!(decoded.symbols, data);
//! assert!(decoded.clean_end());
//! ```

pub mod bytes;
pub mod container;
mod error;
pub mod message;
pub mod models;
pub mod params;
pub mod selftest;
pub mod stream;

pub use container::{flatten, unflatten, Container};
pub use error::{Error, Result};
pub use message::{Message, Slot};
pub use models::{
    AdaptiveOrder0, AnyModel, ModelSpec, QuantizedDistribution, StaticModel, SymbolModel,
};
pub use params::CodecParams;
pub use stream::{BoundCheck, RateReport};
