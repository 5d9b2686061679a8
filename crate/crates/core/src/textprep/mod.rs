//! Page preprocessing: HTML text extraction and tokenization into the title,
//! strict-body and relaxed-body channels.

mod html;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use html::{extract_text, extract_text_with, ExtractorConfig, Setting};
pub use tokenize::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    Title,
    BodyStrict,
    BodyRelaxed,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Title, Channel::BodyStrict, Channel::BodyRelaxed];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub position: usize,
    pub channel: Channel,
}

/// The three token channels of one page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageText {
    pub page_id: String,
    pub title_tokens: Vec<Token>,
    pub body_strict_tokens: Vec<Token>,
    pub body_relaxed_tokens: Vec<Token>,
}

impl PageText {
    pub fn channel(&self, channel: Channel) -> &[Token] {
        match channel {
            Channel::Title => &self.title_tokens,
            Channel::BodyStrict => &self.body_strict_tokens,
            Channel::BodyRelaxed => &self.body_relaxed_tokens,
        }
    }

    pub fn channel_texts(&self, channel: Channel) -> Vec<String> {
        self.channel(channel).iter().map(|t| t.text.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        Channel::ALL.iter().all(|&c| self.channel(c).is_empty())
    }
}

fn channel_tokens(text: &str, channel: Channel) -> Vec<Token> {
    tokenize(text)
        .into_iter()
        .enumerate()
        .map(|(position, text)| Token {
            text,
            position,
            channel,
        })
        .collect()
}

pub fn preprocess_page(page_id: &str, html: &str) -> PageText {
    preprocess_page_with(page_id, html, &ExtractorConfig::default())
}

/// Title comes from the strict setting only; the body is extracted at both.
pub fn preprocess_page_with(page_id: &str, html: &str, cfg: &ExtractorConfig) -> PageText {
    let (title, strict) = extract_text_with(html, Setting::Strict, cfg);
    let (_, relaxed) = extract_text_with(html, Setting::Relaxed, cfg);
    PageText {
        page_id: page_id.to_owned(),
        title_tokens: channel_tokens(&title, Channel::Title),
        body_strict_tokens: channel_tokens(&strict, Channel::BodyStrict),
        body_relaxed_tokens: channel_tokens(&relaxed, Channel::BodyRelaxed),
    }
}
