public class AssetUtils {
    public static Bitmap getBitmap(Context context, String fileName) {
        AssetManager am = context.getAssets();
        Bitmap image = null;
        try {
            InputStream is = am.open(fileName);
            image = BitmapFactory.decodeStream(is);
            is.close();
        } catch (IOException e) {
            e.printStackTrace();
        }
        return image;
    }
}
