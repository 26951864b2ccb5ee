/**
 * Small DOM construction helpers shared by the panels.
 */

import type { ItemRef } from './types.js';

/** Creates an element with an optional class and text content. */
export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** File extensions rendered inline as images. */
const IMAGE_EXTENSIONS = new Set(['png', 'jpg', 'jpeg', 'gif', 'webp', 'svg']);

/** File extensions rendered inline inside a sandboxed frame. */
const FRAME_EXTENSIONS = new Set(['pdf', 'txt', 'md', 'html']);

/**
 * Builds the content element for an item card.
 *
 * Known media types embed inline, frames are sandboxed, and anything else
 * falls back to a download link so unknown content never executes in-page.
 */
export function contentMedia(item: ItemRef): HTMLElement {
  if (item.content_ref === null) {
    return el('p', 'content-empty', 'No content attached.');
  }
  const extension = item.content_ref.split('.').pop()?.toLowerCase() ?? '';
  if (IMAGE_EXTENSIONS.has(extension)) {
    const image = el('img', 'content-media');
    image.src = item.content_ref;
    image.alt = item.label;
    return image;
  }
  if (FRAME_EXTENSIONS.has(extension)) {
    const frame = el('iframe', 'content-media');
    frame.src = item.content_ref;
    frame.setAttribute('sandbox', '');
    frame.title = item.label;
    return frame;
  }
  const link = el('a', 'content-download', `Download ${item.label}`);
  link.href = item.content_ref;
  link.setAttribute('download', '');
  return link;
}
