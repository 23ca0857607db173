/** Styling constants; the semantics (yellow = new, red star = ever appeared) are fixed. */

export const STAR_GLYPH = "★";

/** How long the yellow background takes to fade in, in milliseconds. */
export const HIGHLIGHT_FADE_MS = 600;

/** How long removed items take to fade out before the view is replaced. */
export const LEAVE_MS = 150;
