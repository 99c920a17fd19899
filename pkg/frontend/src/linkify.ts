const URL_PATTERN = /https?:\/\/[^\s<>"')\]]+/g;

/**
 * Render tracker text as plain text with clickable URLs. Everything goes
 * through createTextNode/textContent, so markup in issue text stays inert.
 */
export function renderTextWithLinks(text: string): DocumentFragment {
  const fragment = document.createDocumentFragment();
  let last = 0;
  for (const match of text.matchAll(URL_PATTERN)) {
    const start = match.index ?? 0;
    if (start > last) {
      fragment.appendChild(document.createTextNode(text.slice(last, start)));
    }
    const anchor = document.createElement('a');
    anchor.href = match[0];
    anchor.textContent = match[0];
    anchor.target = '_blank';
    anchor.rel = 'noopener noreferrer';
    fragment.appendChild(anchor);
    last = start + match[0].length;
  }
  if (last < text.length) {
    fragment.appendChild(document.createTextNode(text.slice(last)));
  }
  return fragment;
}
